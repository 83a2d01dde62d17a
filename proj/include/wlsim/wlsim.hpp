#pragma once

// Umbrella header.

#include "wlsim/common.hpp"
#include "wlsim/corr.hpp"
#include "wlsim/corrmat.hpp"
#include "wlsim/csv.hpp"
#include "wlsim/ensemble.hpp"
#include "wlsim/fft.hpp"
#include "wlsim/field.hpp"
#include "wlsim/grid.hpp"
#include "wlsim/hydro.hpp"
#include "wlsim/initcond.hpp"
#include "wlsim/kuramoto.hpp"
#include "wlsim/potential.hpp"
#include "wlsim/ratefit.hpp"
#include "wlsim/report.hpp"
#include "wlsim/runner.hpp"
#include "wlsim/scenario.hpp"
#include "wlsim/sl.hpp"
#include "wlsim/snapshot.hpp"
#include "wlsim/util.hpp"
#include "wlsim/wigner.hpp"
