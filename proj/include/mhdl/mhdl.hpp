#pragma once

#include "mhdl/admissibility.hpp"
#include "mhdl/checkpoint.hpp"
#include "mhdl/config.hpp"
#include "mhdl/decay_oracle.hpp"
#include "mhdl/diagnostics.hpp"
#include "mhdl/energy.hpp"
#include "mhdl/eulerian.hpp"
#include "mhdl/fit.hpp"
#include "mhdl/force.hpp"
#include "mhdl/geometry.hpp"
#include "mhdl/initial_data.hpp"
#include "mhdl/initial_map.hpp"
#include "mhdl/interpolate.hpp"
#include "mhdl/lagrangian.hpp"
#include "mhdl/norms.hpp"
#include "mhdl/pressure.hpp"
#include "mhdl/propagator.hpp"
#include "mhdl/runner.hpp"
