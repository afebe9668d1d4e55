#pragma once

// Everything in one include.

#include "eddy/bench.hpp"
#include "eddy/current_basis.hpp"
#include "eddy/drive.hpp"
#include "eddy/errors.hpp"
#include "eddy/frequency.hpp"
#include "eddy/geometry.hpp"
#include "eddy/inductance.hpp"
#include "eddy/io.hpp"
#include "eddy/linalg.hpp"
#include "eddy/modal.hpp"
#include "eddy/ndt.hpp"
#include "eddy/network.hpp"
#include "eddy/observer.hpp"
#include "eddy/parallel.hpp"
#include "eddy/reduction.hpp"
#include "eddy/transient.hpp"
