#pragma once

#include "flr/error.hpp"
#include "flr/weights.hpp"
#include "flr/random.hpp"
#include "flr/function_space.hpp"
#include "flr/representer.hpp"
#include "flr/rate_catalog.hpp"
#include "flr/rates.hpp"
#include "flr/simulation.hpp"
#include "flr/estimator.hpp"
#include "flr/galerkin.hpp"
#include "flr/experiments.hpp"
