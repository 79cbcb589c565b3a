#pragma once

#include "halfspace/core.hpp"
#include "halfspace/extension.hpp"
#include "halfspace/field_io.hpp"
#include "halfspace/grid.hpp"
#include "halfspace/invariance.hpp"
#include "halfspace/kernels.hpp"
#include "halfspace/liouville.hpp"
#include "halfspace/moebius.hpp"
#include "halfspace/operator.hpp"
#include "halfspace/quadrature.hpp"
#include "halfspace/solver.hpp"
#include "halfspace/version.hpp"
#include "halfspace/weight.hpp"
