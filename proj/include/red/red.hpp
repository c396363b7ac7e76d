#pragma once

#include "red/defaults.hpp"
#include "red/error.hpp"
#include "red/fitting.hpp"
#include "red/ingest.hpp"
#include "red/metrics.hpp"
#include "red/numerics/bisect.hpp"
#include "red/numerics/delaunay.hpp"
#include "red/numerics/least_squares.hpp"
#include "red/numerics/predicates.hpp"
#include "red/projection.hpp"
#include "red/surface_io.hpp"
#include "red/svg.hpp"
