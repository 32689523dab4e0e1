#pragma once

#include "distributions.hpp"
#include "error.hpp"
#include "estimators.hpp"
#include "experiments.hpp"
#include "interval.hpp"
#include "io_formats.hpp"
#include "plot.hpp"
#include "resampling.hpp"
#include "rng.hpp"
#include "score_sample.hpp"
#include "special_functions.hpp"
#include "version.hpp"
