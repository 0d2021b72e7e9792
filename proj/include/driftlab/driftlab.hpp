#pragma once

#include "driftlab/errors.hpp"
#include "driftlab/grid.hpp"
#include "driftlab/rng.hpp"
#include "driftlab/noise.hpp"
#include "driftlab/polynomial.hpp"
#include "driftlab/scenarios.hpp"
#include "driftlab/basis.hpp"
#include "driftlab/estimators.hpp"
#include "driftlab/selection.hpp"
#include "driftlab/montecarlo.hpp"
