#ifndef GMATCH_GMATCH_HPP
#define GMATCH_GMATCH_HPP

#include "gmatch/core.hpp"
#include "gmatch/error.hpp"
#include "gmatch/estimators.hpp"
#include "gmatch/inference.hpp"
#include "gmatch/matching.hpp"
#include "gmatch/parallel.hpp"
#include "gmatch/rng.hpp"
#include "gmatch/simulation.hpp"
#include "gmatch/solver.hpp"

#endif  // GMATCH_GMATCH_HPP
