#pragma once

#include "polcnot/angle.hpp"
#include "polcnot/calibration.hpp"
#include "polcnot/cell.hpp"
#include "polcnot/error.hpp"
#include "polcnot/format.hpp"
#include "polcnot/medium.hpp"
#include "polcnot/random.hpp"
#include "polcnot/runner.hpp"
#include "polcnot/scenario.hpp"
