#pragma once

// Umbrella header: identification of ARMA systems observed through a
// fixed-threshold binary sensor, the convergence-condition calculus, and
// the Monte Carlo harness.

#include "binquant/analysis.hpp"
#include "binquant/arma_model.hpp"
#include "binquant/errors.hpp"
#include "binquant/estimator.hpp"
#include "binquant/experiment.hpp"
#include "binquant/harness.hpp"
#include "binquant/noise.hpp"
#include "binquant/projection.hpp"
#include "binquant/recursion_lab.hpp"
#include "binquant/rng.hpp"
