// pqsi.hpp
// Umbrella header for the purest-state identification library.

#pragma once

#include "pqsi/ensemble_io.hpp"
#include "pqsi/estimate.hpp"
#include "pqsi/harness.hpp"
#include "pqsi/identify.hpp"
#include "pqsi/lowerbound.hpp"
#include "pqsi/matrix.hpp"
#include "pqsi/measure.hpp"
#include "pqsi/qcore.hpp"
#include "pqsi/rng.hpp"
