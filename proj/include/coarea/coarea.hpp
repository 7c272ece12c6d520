#pragma once

// Umbrella header.

#include "coarea/chart.hpp"
#include "coarea/dual.hpp"
#include "coarea/errors.hpp"
#include "coarea/expr.hpp"
#include "coarea/flow.hpp"
#include "coarea/grid.hpp"
#include "coarea/integrate.hpp"
#include "coarea/obj_export.hpp"
#include "coarea/report.hpp"
#include "coarea/scalar_field.hpp"
#include "coarea/vec.hpp"
