#pragma once

#include "qhydro/audit.hpp"
#include "qhydro/config.hpp"
#include "qhydro/error.hpp"
#include "qhydro/fft.hpp"
#include "qhydro/field.hpp"
#include "qhydro/grid.hpp"
#include "qhydro/hydro.hpp"
#include "qhydro/io.hpp"
#include "qhydro/klein_gordon.hpp"
#include "qhydro/madelung.hpp"
#include "qhydro/report.hpp"
#include "qhydro/schrodinger.hpp"
#include "qhydro/spectral.hpp"
#include "qhydro/support.hpp"
#include "qhydro/trajectories.hpp"
#include "qhydro/uncertainty.hpp"
