// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "sedkit/core.hpp"
#include "sedkit/postprocess.hpp"

namespace sedkit {

/// Each maximal run of active frames [i, j] for class c becomes
/// Event(c, frame_to_seconds(i), frame_to_seconds(j+1)); the exclusive
/// frame end keeps single-frame events one effective hop long.
EventList mask_to_events(const BinaryMask& mask);

/// Averages several models' posteriors for the same clip. Inputs are
/// resampled to the finest time grid by frame repetition (piecewise
/// constant, no interpolation) and truncated to the shortest upsampled
/// length before the element-wise mean. Requires >= 2 clips with identical
/// clip_id, class map and base hop.
PosteriorClip fuse(std::span<const PosteriorClip> clips);

}  // namespace sedkit
