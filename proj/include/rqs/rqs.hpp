#pragma once

#include "rqs/distributions.hpp"
#include "rqs/errors.hpp"
#include "rqs/experiment.hpp"
#include "rqs/io.hpp"
#include "rqs/marginals.hpp"
#include "rqs/numeric.hpp"
#include "rqs/parallel.hpp"
#include "rqs/rng.hpp"
#include "rqs/state.hpp"
#include "rqs/stats.hpp"
#include "rqs/xeb.hpp"
