#pragma once

#include "errors.hpp"
#include "scalar.hpp"
#include "params.hpp"
#include "core_map.hpp"
#include "symbolic.hpp"
#include "cantor.hpp"
#include "construction.hpp"
#include "statistics.hpp"
#include "pipeline.hpp"
#include "config.hpp"
