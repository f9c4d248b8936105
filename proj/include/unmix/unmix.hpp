#pragma once

// Umbrella header for the unmix library.

#include "unmix/core.hpp"
#include "unmix/errors.hpp"
#include "unmix/graph.hpp"
#include "unmix/io.hpp"
#include "unmix/metrics.hpp"
#include "unmix/rng.hpp"
#include "unmix/simdata.hpp"
#include "unmix/sparseness.hpp"
#include "unmix/unmixing.hpp"
