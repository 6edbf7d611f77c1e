#pragma once

#include "dendro.hpp"
#include "export.hpp"
#include "linkage.hpp"
#include "numeric.hpp"
#include "pair_group.hpp"
#include "proximity.hpp"
#include "variable_group.hpp"
