#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <mdendro/mdendro.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ArgsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

std::string lowercase(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

mdendro::Measure parse_measure(const std::string& token) {
  const std::string key = lowercase(token);
  if (key == "distances") return mdendro::Measure::Distance;
  if (key == "weights") return mdendro::Measure::Weight;
  throw ArgsError("unknown proximity type '" + token + "' (use distances or weights)");
}

mdendro::TiePolicy parse_tie_policy(const std::string& token) {
  const std::string key = lowercase(token);
  if (key == "first") return mdendro::TiePolicy::first();
  if (key == "last") return mdendro::TiePolicy::last();
  if (key.rfind("random:", 0) == 0) {
    try {
      return mdendro::TiePolicy::random(std::stoull(key.substr(7)));
    } catch (const std::exception&) {
      throw ArgsError("bad seed in tie policy '" + token + "'");
    }
  }
  throw ArgsError("unknown tie policy '" + token + "' (use first, last or random:SEED)");
}

struct Formats {
  bool txt = false;
  bool newick = false;
  bool ultrametric = false;
  bool svg = false;
};

Formats parse_formats(const std::string& csv) {
  Formats formats;
  std::stringstream stream(csv);
  std::string token;
  while (std::getline(stream, token, ',')) {
    const std::string key = lowercase(token);
    if (key == "txt") formats.txt = true;
    else if (key == "newick") formats.newick = true;
    else if (key == "ultrametric") formats.ultrametric = true;
    else if (key == "svg") formats.svg = true;
    else throw ArgsError("unknown output format '" + token + "'");
  }
  return formats;
}

struct DirectArgs {
  std::string file;
  std::string type_token;
  std::string method_token;
  int precision = -1;
  std::string out_dir = ".";
  std::string formats_csv = "txt,newick,ultrametric,svg";
  std::string mode = "direct";
  std::string tie_policy = "first";
  std::size_t max_enum = 10000;
  std::string json_report;
};

const char* measure_word(mdendro::Measure measure) {
  return measure == mdendro::Measure::Weight ? "weights" : "distances";
}

int run_direct(const DirectArgs& args) {
  const mdendro::Measure measure = parse_measure(args.type_token);
  const auto method = mdendro::parse_method(args.method_token);
  if (!method) throw ArgsError("unknown method '" + args.method_token + "'");
  if (args.mode != "direct" && args.mode != "pair-group" && args.mode != "enumerate-ties")
    throw ArgsError("unknown mode '" + args.mode + "' (use direct, pair-group or enumerate-ties)");
  const Formats formats = parse_formats(args.formats_csv);
  const mdendro::TiePolicy policy = parse_tie_policy(args.tie_policy);

  const std::string text = read_file(args.file);
  mdendro::ProximityData data = mdendro::parse_proximities(text, measure);
  const int precision = args.precision >= 0 ? args.precision : mdendro::infer_precision(data);
  data = mdendro::apply_precision(data, precision);

  std::cout << "Input: " << args.file << "\n";
  std::cout << "Measure: " << measure_word(measure) << "\n";
  std::cout << "Method: " << mdendro::method_name(*method) << "\n";
  std::cout << "Precision: " << precision << "\n";
  std::cout << "Leaves: " << data.size() << "\n";

  json report;
  report["input"] = args.file;
  report["measure"] = measure_word(measure);
  report["method"] = std::string(mdendro::method_name(*method));
  report["precision"] = precision;
  report["leaves"] = data.size();
  report["mode"] = args.mode;

  if (args.mode == "enumerate-ties") {
    const auto trees = mdendro::enumerate_tie_dendrograms(data, *method, args.max_enum);
    std::cout << "Distinct dendrograms: " << trees.size() << "\n";
    json newicks = json::array();
    for (const auto& tree : trees) {
      const std::string newick = mdendro::to_newick(mdendro::to_multidendrogram(tree), precision);
      std::cout << newick;
      std::string line = newick;
      if (!line.empty() && line.back() == '\n') line.pop_back();
      newicks.push_back(line);
    }
    report["distinct_dendrograms"] = trees.size();
    report["newick"] = newicks;
    if (!args.json_report.empty()) write_file(args.json_report, report.dump(2) + "\n");
    return 0;
  }

  mdendro::Multidendrogram tree;
  int tie_iterations = 0;
  int band_nodes = 0;
  std::vector<mdendro::ReversalEvent> reversals;
  int height_reversals = 0;

  if (args.mode == "direct") {
    auto result = mdendro::variable_group_cluster(data, *method);
    tree = std::move(result.tree);
    tie_iterations = result.tie_iterations;
    band_nodes = result.band_nodes;
    reversals = std::move(result.reversals);
  } else {
    mdendro::PairGroupStats stats;
    const auto binary = mdendro::pair_group_cluster(data, *method, policy, &stats);
    tree = mdendro::to_multidendrogram(binary);
    tie_iterations = stats.tie_iterations;
    height_reversals = stats.height_reversals;
  }

  const mdendro::UltrametricMatrix ultra = mdendro::cophenetic_matrix(tree);
  const mdendro::DeviationReport deviation = mdendro::deviation_measures(data, ultra);

  std::cout << "Cophenetic correlation coefficient: " << mdendro::format_fixed(deviation.ccc, 6)
            << "\n";
  std::cout << "Normalized mean squared error: " << mdendro::format_fixed(deviation.nmse, 6)
            << "\n";
  std::cout << "Normalized mean absolute error: " << mdendro::format_fixed(deviation.nmae, 6)
            << "\n";
  std::cout << "Tied iterations: " << tie_iterations << "\n";
  std::cout << "Band nodes: " << band_nodes << "\n";
  if (args.mode == "direct") {
    std::cout << "Reversals: " << reversals.size() << "\n";
    for (const auto& event : reversals)
      std::cout << "Reversal: band upper " << mdendro::format_fixed(event.band_upper, precision)
                << " exceeds next minimum " << mdendro::format_fixed(event.d_next, precision)
                << "\n";
  } else {
    std::cout << "Reversals: " << height_reversals << "\n";
  }

  auto number_or_null = [](double value) {
    return std::isfinite(value) ? json(value) : json(nullptr);
  };
  report["ccc"] = number_or_null(deviation.ccc);
  report["nmse"] = number_or_null(deviation.nmse);
  report["nmae"] = number_or_null(deviation.nmae);
  report["tied_iterations"] = tie_iterations;
  report["band_nodes"] = band_nodes;
  if (args.mode == "direct") {
    json events = json::array();
    for (const auto& event : reversals)
      events.push_back({{"band_upper", event.band_upper}, {"next_minimum", event.d_next}});
    report["reversals"] = events;
  } else {
    report["reversals"] = height_reversals;
  }

  fs::create_directories(args.out_dir);
  const std::string stem = fs::path(args.file).stem().string();
  const std::string base = stem + "-" + std::string(mdendro::method_name(*method));
  json outputs = json::array();
  auto emit = [&](bool enabled, const std::string& extension, const std::string& content) {
    if (!enabled) return;
    const fs::path path = fs::path(args.out_dir) / (base + extension);
    write_file(path, content);
    std::cout << "Wrote: " << path.string() << "\n";
    outputs.push_back(path.string());
  };
  emit(formats.txt, ".txt", mdendro::to_text_details(tree));
  emit(formats.newick, ".nwk", mdendro::to_newick(tree, precision));
  emit(formats.ultrametric, ".ultrametric.txt", mdendro::ultrametric_to_txt(ultra));
  emit(formats.svg, ".svg", mdendro::render_svg(tree));
  report["outputs"] = outputs;

  if (!args.json_report.empty()) write_file(args.json_report, report.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agglomerative hierarchical clustering with multidendrograms"};
  app.require_subcommand(1);

  DirectArgs args;
  CLI::App* direct = app.add_subcommand(
      "direct", "Cluster a proximity file and export the unique multidendrogram");
  direct->add_option("file", args.file, "proximity data file (matrix or list form)")->required();
  direct->add_option("type", args.type_token, "proximity type: distances or weights")->required();
  direct->add_option("method", args.method_token,
                     "single_linkage, complete_linkage, unweighted_average, weighted_average, "
                     "unweighted_centroid, weighted_centroid or ward")
      ->required();
  direct->add_option("precision", args.precision, "decimal digits (default: inferred from input)")
      ->check(CLI::NonNegativeNumber);
  direct->add_option("--out-dir", args.out_dir, "output directory")->capture_default_str();
  direct->add_option("--formats", args.formats_csv,
                     "comma list of outputs: txt,newick,ultrametric,svg")
      ->capture_default_str();
  direct->add_option("--mode", args.mode, "direct, pair-group or enumerate-ties")
      ->capture_default_str();
  direct->add_option("--tie-policy", args.tie_policy,
                     "pair-group tie break: first, last or random:SEED")
      ->capture_default_str();
  direct->add_option("--max-enum", args.max_enum, "merge sequence budget for enumerate-ties")
      ->capture_default_str();
  direct->add_option("--json-report", args.json_report, "write a machine-readable report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: args: " << e.what() << "\n";
    return 1;
  }

  try {
    return run_direct(args);
  } catch (const ArgsError& e) {
    std::cerr << "error: args: " << e.what() << "\n";
    return 1;
  } catch (const mdendro::EnumerationBudgetExceeded& e) {
    std::cerr << "error: budget: " << e.what() << "\n";
    return 3;
  } catch (const mdendro::ParseError& e) {
    std::cerr << "error: parse: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}
