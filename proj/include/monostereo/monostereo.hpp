#pragma once

/// Umbrella header for the monostereo library: a hybrid depth pipeline that
/// turns a monocular structured-light subsystem into guidance hints for a
/// binocular cost-volume stereo matcher, plus the speckle simulator,
/// space-time ground-truth builder, and evaluation tooling around it.

#include "monostereo/errors.hpp"
#include "monostereo/geometry.hpp"
#include "monostereo/image.hpp"
#include "monostereo/io/calib_io.hpp"
#include "monostereo/io/config_io.hpp"
#include "monostereo/io/pfm.hpp"
#include "monostereo/io/png_io.hpp"
#include "monostereo/io/scene_io.hpp"
#include "monostereo/metrics.hpp"
#include "monostereo/msl.hpp"
#include "monostereo/pipeline.hpp"
#include "monostereo/rng.hpp"
#include "monostereo/spacetime_gt.hpp"
#include "monostereo/speckle_sim.hpp"
#include "monostereo/stereo_core.hpp"
