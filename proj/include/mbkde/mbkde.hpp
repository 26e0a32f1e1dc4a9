#pragma once

#include "densities.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "metrics.hpp"
#include "parametric.hpp"
#include "random.hpp"
#include "sim.hpp"
#include "theory.hpp"
