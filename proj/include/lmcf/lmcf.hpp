#pragma once

#include "lmcf/errors.hpp"
#include "lmcf/grid.hpp"
#include "lmcf/trajectory.hpp"
#include "lmcf/geometry.hpp"
#include "lmcf/flow.hpp"
#include "lmcf/estimates.hpp"
#include "lmcf/liouville.hpp"
#include "lmcf/initial_data.hpp"
#include "lmcf/persistence.hpp"
#include "lmcf/reports.hpp"
#include "lmcf/run.hpp"
