#pragma once

// Umbrella header.

#include "lehmann/base_dist.hpp"
#include "lehmann/descriptor.hpp"
#include "lehmann/errors.hpp"
#include "lehmann/estimate.hpp"
#include "lehmann/extended.hpp"
#include "lehmann/infotheory.hpp"
#include "lehmann/lrt_sim.hpp"
#include "lehmann/numeric.hpp"
#include "lehmann/quadrature.hpp"
#include "lehmann/rng.hpp"
#include "lehmann/sample_io.hpp"
#include "lehmann/svg_plot.hpp"
