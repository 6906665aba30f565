// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#include "sedkit/postprocess.hpp"

#include <algorithm>
#include <stdexcept>

namespace sedkit {
namespace {

void check_clip(const PosteriorClip& clip) {
    if (auto error = validate_clip(clip)) {
        throw std::invalid_argument("invalid clip: " + *error);
    }
}

template <typename Params, typename SequenceOp>
BinaryMask apply_per_class(const PosteriorClip& clip, const Params& params,
                           SequenceOp&& op) {
    check_clip(clip);
    validate(params);
    BinaryMask mask(clip.clip_id, clip.probs.rows(), clip.classes, clip.grid);
    for (std::size_t c = 0; c < clip.classes.size(); ++c) {
        const auto column = clip.probs.column(c);
        const auto active = op(column, params);
        for (std::size_t t = 0; t < active.size(); ++t) {
            mask.set(t, c, active[t] != 0);
        }
    }
    return mask;
}

}  // namespace

void validate(const MedianFilterParams& params) {
    if (!(params.phi > 0.0 && params.phi < 1.0)) {
        throw std::invalid_argument("median filter threshold must lie in (0,1)");
    }
    if (params.omega < 1) {
        throw std::invalid_argument("median filter window must be >= 1");
    }
    if (params.omega % 2 == 0) {
        throw std::invalid_argument("window must be odd");
    }
}

void validate(const DoubleThresholdParams& params) {
    if (!(params.phi_low > 0.0 && params.phi_low <= params.phi_hi && params.phi_hi < 1.0)) {
        throw std::invalid_argument(
            "double threshold requires 0 < phi_low <= phi_hi < 1");
    }
    if (params.omega < 1) {
        throw std::invalid_argument("connect window must be >= 1");
    }
}

BinaryMask::BinaryMask(std::string id, std::size_t frames, const ClassMap& class_map,
                       const TimeGrid& time_grid)
    : clip_id(std::move(id)),
      grid(time_grid),
      classes(class_map),
      frames_(frames),
      values_(frames * class_map.size(), 0) {}

std::vector<std::uint8_t> median_filter_sequence(std::span<const double> sequence,
                                                 double phi, int omega) {
    if (omega < 1 || omega % 2 == 0) {
        throw std::invalid_argument("window must be odd");
    }
    const std::size_t n = sequence.size();
    std::vector<std::uint8_t> binary(n);
    for (std::size_t t = 0; t < n; ++t) {
        binary[t] = sequence[t] > phi ? 1 : 0;
    }
    if (omega == 1) {
        return binary;
    }

    std::vector<std::size_t> prefix(n + 1, 0);
    for (std::size_t t = 0; t < n; ++t) {
        prefix[t + 1] = prefix[t] + binary[t];
    }

    const std::size_t half = static_cast<std::size_t>(omega / 2);
    std::vector<std::uint8_t> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t lo = t >= half ? t - half : 0;
        const std::size_t hi = std::min(t + half, n - 1);
        const std::size_t ones = prefix[hi + 1] - prefix[lo];
        const std::size_t len = hi - lo + 1;
        out[t] = (2 * ones >= len) ? 1 : 0;
    }
    return out;
}

std::vector<std::uint8_t> double_threshold_sequence(std::span<const double> sequence,
                                                    double phi_low, double phi_hi,
                                                    int omega) {
    const std::size_t n = sequence.size();
    std::vector<std::uint8_t> out(n, 0);

    // Mark each contiguous run above phi_low that contains a seed (> phi_hi).
    std::size_t t = 0;
    while (t < n) {
        if (!(sequence[t] > phi_low)) {
            ++t;
            continue;
        }
        std::size_t run_end = t;
        bool has_seed = false;
        while (run_end < n && sequence[run_end] > phi_low) {
            if (sequence[run_end] > phi_hi) {
                has_seed = true;
            }
            ++run_end;
        }
        if (has_seed) {
            std::fill(out.begin() + t, out.begin() + run_end, std::uint8_t{1});
        }
        t = run_end;
    }

    if (omega <= 1) {
        return out;
    }

    // Bridge gaps of fewer than omega frames between accepted segments.
    std::ptrdiff_t prev_end = -1;  // last active frame seen so far
    for (std::size_t i = 0; i < n; ++i) {
        if (out[i] == 0) {
            continue;
        }
        if (prev_end >= 0) {
            const std::ptrdiff_t gap = static_cast<std::ptrdiff_t>(i) - prev_end - 1;
            if (gap > 0 && gap < omega) {
                std::fill(out.begin() + prev_end + 1, out.begin() + i, std::uint8_t{1});
            }
        }
        // Skip to the end of this segment.
        std::size_t j = i;
        while (j + 1 < n && out[j + 1] != 0) {
            ++j;
        }
        prev_end = static_cast<std::ptrdiff_t>(j);
        i = j;
    }
    return out;
}

BinaryMask median_filter(const PosteriorClip& clip, const MedianFilterParams& params) {
    return apply_per_class(clip, params, [](const auto& column, const auto& p) {
        return median_filter_sequence(column, p.phi, p.omega);
    });
}

BinaryMask double_threshold(const PosteriorClip& clip,
                            const DoubleThresholdParams& params) {
    return apply_per_class(clip, params, [](const auto& column, const auto& p) {
        return double_threshold_sequence(column, p.phi_low, p.phi_hi, p.omega);
    });
}

}  // namespace sedkit
