#pragma once

// Umbrella header for the SSTA forecasting toolkit.

#include "ssta/bayesian_ridge.hpp"
#include "ssta/blocks.hpp"
#include "ssta/climatology.hpp"
#include "ssta/composite.hpp"
#include "ssta/csv.hpp"
#include "ssta/errors.hpp"
#include "ssta/evaluation.hpp"
#include "ssta/features.hpp"
#include "ssta/gbdt.hpp"
#include "ssta/grid.hpp"
#include "ssta/mlp.hpp"
#include "ssta/model_io.hpp"
#include "ssta/month.hpp"
#include "ssta/neighbors.hpp"
#include "ssta/persistence.hpp"
#include "ssta/recursive.hpp"
#include "ssta/rng.hpp"
#include "ssta/svg.hpp"
#include "ssta/synthgen.hpp"
