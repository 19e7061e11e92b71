#pragma once

#include "cottonkit/jet.hpp"
#include "cottonkit/expr.hpp"
#include "cottonkit/metric.hpp"
#include "cottonkit/geometry.hpp"
#include "cottonkit/reduction.hpp"
#include "cottonkit/catalog.hpp"
#include "cottonkit/ode.hpp"
#include "cottonkit/kink.hpp"
#include "cottonkit/symmetry.hpp"
#include "cottonkit/lattice.hpp"
#include "cottonkit/report.hpp"
#include "cottonkit/io.hpp"
#include "cottonkit/suite.hpp"
