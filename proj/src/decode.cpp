// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#include "sedkit/decode.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace sedkit {

EventList mask_to_events(const BinaryMask& mask) {
    std::vector<Event> events;
    for (std::size_t c = 0; c < mask.classes.size(); ++c) {
        const std::string& label = mask.classes.label(c);
        std::size_t t = 0;
        while (t < mask.frames()) {
            if (!mask.at(t, c)) {
                ++t;
                continue;
            }
            std::size_t run_end = t;
            while (run_end + 1 < mask.frames() && mask.at(run_end + 1, c)) {
                ++run_end;
            }
            events.push_back(Event{label, frame_to_seconds(t, mask.grid),
                                   frame_to_seconds(run_end + 1, mask.grid)});
            t = run_end + 1;
        }
    }
    return EventList(mask.clip_id, std::move(events));
}

PosteriorClip fuse(std::span<const PosteriorClip> clips) {
    if (clips.size() < 2) {
        throw std::invalid_argument("fusion requires at least two clips");
    }
    const PosteriorClip& first = clips.front();
    int min_factor = first.grid.factor;
    for (const PosteriorClip& clip : clips) {
        if (auto error = validate_clip(clip)) {
            throw std::invalid_argument("invalid clip in fusion: " + *error);
        }
        if (clip.clip_id != first.clip_id) {
            throw std::invalid_argument("fusion requires matching clip ids ('" +
                                        clip.clip_id + "' vs '" + first.clip_id + "')");
        }
        if (clip.classes != first.classes) {
            throw std::invalid_argument("fusion requires identical class maps");
        }
        if (clip.grid.base_hop != first.grid.base_hop) {
            throw std::invalid_argument("fusion requires identical base hops");
        }
        min_factor = std::min(min_factor, clip.grid.factor);
    }

    std::size_t out_frames = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> ratios(clips.size());
    for (std::size_t i = 0; i < clips.size(); ++i) {
        const int factor = clips[i].grid.factor;
        if (factor % min_factor != 0) {
            throw std::invalid_argument("fusion factors must be integer multiples of "
                                        "the finest factor");
        }
        ratios[i] = static_cast<std::size_t>(factor / min_factor);
        out_frames = std::min(out_frames, clips[i].probs.rows() * ratios[i]);
    }

    PosteriorClip out;
    out.clip_id = first.clip_id;
    out.classes = first.classes;
    out.grid = TimeGrid{first.grid.base_hop, min_factor};
    out.probs = Matrix(out_frames, first.classes.size());
    const double inv_n = 1.0 / static_cast<double>(clips.size());
    for (std::size_t t = 0; t < out_frames; ++t) {
        for (std::size_t c = 0; c < out.classes.size(); ++c) {
            double sum = 0.0;
            for (std::size_t i = 0; i < clips.size(); ++i) {
                sum += clips[i].probs(t / ratios[i], c);
            }
            out.probs(t, c) = sum * inv_n;
        }
    }
    return out;
}

}  // namespace sedkit
