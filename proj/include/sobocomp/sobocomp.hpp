#pragma once

#include "sobocomp/config.hpp"
#include "sobocomp/cover.hpp"
#include "sobocomp/cutoff.hpp"
#include "sobocomp/engine.hpp"
#include "sobocomp/errors.hpp"
#include "sobocomp/expr.hpp"
#include "sobocomp/exponents.hpp"
#include "sobocomp/families.hpp"
#include "sobocomp/forms.hpp"
#include "sobocomp/grid.hpp"
#include "sobocomp/muckenhoupt.hpp"
#include "sobocomp/parallel.hpp"
#include "sobocomp/poincare.hpp"
#include "sobocomp/quasimetric.hpp"
#include "sobocomp/rational.hpp"
#include "sobocomp/report.hpp"
#include "sobocomp/sobolev_local.hpp"
