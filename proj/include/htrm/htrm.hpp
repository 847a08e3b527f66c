#pragma once

#include "averaged_semicircle.hpp"
#include "config.hpp"
#include "densities.hpp"
#include "eigen_cache.hpp"
#include "ensembles.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "freeprob.hpp"
#include "matrix.hpp"
#include "meijer_g.hpp"
#include "output.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "special_functions.hpp"
#include "spectral_stats.hpp"
#include "stable.hpp"
