// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sedkit/core.hpp"

namespace sedkit {

struct MedianFilterParams {
    double phi = 0.5;  // binarization threshold, strict y > phi
    int omega = 51;    // window size in frames, odd; 1 means no filtering
};

struct DoubleThresholdParams {
    double phi_low = 0.2;
    double phi_hi = 0.75;
    int omega = 1;  // gaps shorter than omega frames are bridged; 1 bridges nothing
};

void validate(const MedianFilterParams& params);
void validate(const DoubleThresholdParams& params);

/// Per-frame, per-class activity decisions.
struct BinaryMask {
    std::string clip_id;
    TimeGrid grid;
    ClassMap classes;

    BinaryMask() = default;
    BinaryMask(std::string clip_id, std::size_t frames, const ClassMap& classes,
               const TimeGrid& grid);

    std::size_t frames() const { return frames_; }
    bool at(std::size_t t, std::size_t c) const { return values_[t * classes.size() + c] != 0; }
    void set(std::size_t t, std::size_t c, bool v) { values_[t * classes.size() + c] = v ? 1 : 0; }

    bool operator==(const BinaryMask&) const = default;

private:
    std::size_t frames_ = 0;
    std::vector<std::uint8_t> values_;
};

/// Binarize one probability sequence with strict y > phi, then replace each
/// frame by the median of the binary values in the centered window of size
/// omega. Windows are truncated at the clip edges; an even (truncated)
/// window with a split vote takes the upper median (active).
std::vector<std::uint8_t> median_filter_sequence(std::span<const double> sequence,
                                                 double phi, int omega);

/// Frames above phi_hi are seeds; each seed expands through the contiguous
/// run of frames above phi_low containing it; gaps of fewer than omega
/// frames between accepted segments are then bridged.
std::vector<std::uint8_t> double_threshold_sequence(std::span<const double> sequence,
                                                    double phi_low, double phi_hi,
                                                    int omega);

BinaryMask median_filter(const PosteriorClip& clip, const MedianFilterParams& params);
BinaryMask double_threshold(const PosteriorClip& clip, const DoubleThresholdParams& params);

}  // namespace sedkit
