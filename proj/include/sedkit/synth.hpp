// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sedkit/core.hpp"
#include "sedkit/postprocess.hpp"

namespace sedkit {

struct DurationRange {
    double min_seconds = 0.25;
    double max_seconds = 2.0;
};

/// Deterministic corpus generator: flat posteriors (event_level inside
/// events, floor_level outside) plus truncated Gaussian noise. All
/// randomness comes from SplitMix64 (see rng.hpp) with one derived child
/// seed per clip index, so identical specs reproduce identical corpora on
/// every platform.
struct SynthSpec {
    std::uint64_t seed = 0;
    double clip_length_seconds = 10.0;
    TimeGrid grid{0.020, 1};
    ClassMap classes = ClassMap::dcase2018();
    std::map<std::string, DurationRange> durations;  // per class
    DurationRange default_duration{0.25, 2.0};       // for classes not listed
    int min_events_per_class = 0;                    // per clip
    int max_events_per_class = 2;
    int min_separation_frames = 2;  // between same-class events
    double noise_sigma = 0.0;
    double noise_truncation_sigmas = 2.0;  // noise clamped to +-k*sigma
    double event_level = 1.0;
    double floor_level = 0.0;
};

void validate(const SynthSpec& spec);

SynthSpec synth_spec_from_json_text(const std::string& text);
std::string synth_spec_to_json_text(const SynthSpec& spec);

/// Inverse of decode.mask_to_events: frame t is active for class c iff
/// [t*hop, (t+1)*hop) overlaps an event of class c. Events must lie within
/// the grid span [0, frames*hop].
BinaryMask events_to_mask(const EventList& events, const TimeGrid& grid,
                          const ClassMap& classes, std::size_t frames);

struct SynthOutput {
    EventCorpus ground_truth;
    std::vector<PosteriorClip> posteriors;  // sorted by clip_id
};

/// Samples non-overlapping same-class events on the frame grid and renders
/// their posteriors. Throws when a sampled configuration cannot be placed
/// after bounded retries.
SynthOutput generate(const SynthSpec& spec, int n_clips);

}  // namespace sedkit
