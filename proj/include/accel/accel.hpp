#pragma once

#include "analysis.hpp"
#include "errors.hpp"
#include "estimation.hpp"
#include "flows.hpp"
#include "geometry.hpp"
#include "objectives.hpp"
#include "optimizers.hpp"
#include "rng.hpp"
