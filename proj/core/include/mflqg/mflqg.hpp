#pragma once

#include "mflqg/analysis.hpp"
#include "mflqg/augmented.hpp"
#include "mflqg/cc_solver.hpp"
#include "mflqg/config_io.hpp"
#include "mflqg/convexity.hpp"
#include "mflqg/error.hpp"
#include "mflqg/model.hpp"
#include "mflqg/noise.hpp"
#include "mflqg/ode.hpp"
#include "mflqg/oracle.hpp"
#include "mflqg/parallel.hpp"
#include "mflqg/riccati.hpp"
#include "mflqg/simulator.hpp"
#include "mflqg/time_grid.hpp"
