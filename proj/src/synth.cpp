// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#include "sedkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "sedkit/rng.hpp"

namespace sedkit {
namespace {

constexpr int kPlacementRetries = 100;

std::string clip_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "synth_%04d", index);
    return buf;
}

const DurationRange& range_for(const SynthSpec& spec, const std::string& label) {
    const auto it = spec.durations.find(label);
    return it != spec.durations.end() ? it->second : spec.default_duration;
}

// Events of one class for one clip, as [start_frame, end_frame) pairs.
// Durations are drawn in frames, then the slack is split uniformly into
// n+1 gaps around the events (always succeeds once the lengths fit), so
// the only retry loop is over total-length feasibility.
std::vector<std::pair<std::size_t, std::size_t>> place_events(
    SplitMix64& rng, const SynthSpec& spec, const DurationRange& range,
    std::size_t total_frames) {
    const double hop = spec.grid.hop();
    const std::size_t min_frames =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(range.min_seconds / hop)));
    const std::size_t max_frames = std::max<std::size_t>(
        min_frames, static_cast<std::size_t>(std::floor(range.max_seconds / hop)));
    const std::size_t separation = static_cast<std::size_t>(spec.min_separation_frames);

    for (int attempt = 0; attempt < kPlacementRetries; ++attempt) {
        const std::size_t n =
            spec.min_events_per_class +
            rng.uniform_int(spec.max_events_per_class - spec.min_events_per_class + 1);
        if (n == 0) {
            return {};
        }
        std::vector<std::size_t> lengths(n);
        std::size_t occupied = separation * (n - 1);
        for (std::size_t& len : lengths) {
            len = min_frames + rng.uniform_int(max_frames - min_frames + 1);
            occupied += len;
        }
        if (occupied > total_frames) {
            continue;
        }
        const std::size_t slack = total_frames - occupied;
        std::vector<std::size_t> cuts(n);
        for (std::size_t& cut : cuts) {
            cut = rng.uniform_int(slack + 1);
        }
        std::sort(cuts.begin(), cuts.end());
        std::vector<std::pair<std::size_t, std::size_t>> placed;
        std::size_t position = cuts[0];
        std::size_t previous_cut = cuts[0];
        for (std::size_t j = 0; j < n; ++j) {
            if (j > 0) {
                position += separation + (cuts[j] - previous_cut);
                previous_cut = cuts[j];
            }
            placed.emplace_back(position, position + lengths[j]);
            position += lengths[j];
        }
        return placed;
    }
    throw std::runtime_error(
        "synth spec infeasible: could not place events without same-class overlap");
}

}  // namespace

void validate(const SynthSpec& spec) {
    validate(spec.grid);
    if (!(spec.clip_length_seconds > 0.0)) {
        throw std::invalid_argument("clip length must be positive");
    }
    if (spec.classes.size() == 0) {
        throw std::invalid_argument("synth spec requires at least one class");
    }
    if (!(spec.floor_level >= 0.0 && spec.floor_level < spec.event_level &&
          spec.event_level <= 1.0)) {
        throw std::invalid_argument(
            "synth levels must satisfy 0 <= floor_level < event_level <= 1");
    }
    if (spec.min_events_per_class < 0 ||
        spec.max_events_per_class < spec.min_events_per_class) {
        throw std::invalid_argument("invalid events-per-class range");
    }
    if (spec.min_separation_frames < 2) {
        throw std::invalid_argument("same-class separation must be >= 2 frames");
    }
    if (spec.noise_sigma < 0.0 || spec.noise_truncation_sigmas <= 0.0) {
        throw std::invalid_argument("invalid noise settings");
    }
    auto check_range = [](const DurationRange& r, const std::string& what) {
        if (!(r.min_seconds > 0.0 && r.min_seconds <= r.max_seconds)) {
            throw std::invalid_argument("invalid duration range for " + what);
        }
    };
    check_range(spec.default_duration, "default");
    for (const auto& [label, range] : spec.durations) {
        check_range(range, label);
    }
}

SynthSpec synth_spec_from_json_text(const std::string& text) {
    const auto json = nlohmann::json::parse(text);
    SynthSpec spec;
    if (json.contains("seed")) spec.seed = json.at("seed").get<std::uint64_t>();
    if (json.contains("clip_length_seconds")) {
        spec.clip_length_seconds = json.at("clip_length_seconds").get<double>();
    }
    if (json.contains("base_hop_seconds")) {
        spec.grid.base_hop = json.at("base_hop_seconds").get<double>();
    }
    if (json.contains("factor")) spec.grid.factor = json.at("factor").get<int>();
    if (json.contains("classes")) {
        spec.classes = ClassMap(json.at("classes").get<std::vector<std::string>>());
    }
    auto read_range = [](const nlohmann::json& j) {
        if (!j.is_array() || j.size() != 2) {
            throw std::invalid_argument("duration range must be [min_seconds, max_seconds]");
        }
        return DurationRange{j[0].get<double>(), j[1].get<double>()};
    };
    if (json.contains("default_duration")) {
        spec.default_duration = read_range(json.at("default_duration"));
    }
    if (json.contains("durations")) {
        for (const auto& [label, range] : json.at("durations").items()) {
            spec.durations[label] = read_range(range);
        }
    }
    if (json.contains("events_per_class")) {
        const auto& r = json.at("events_per_class");
        if (!r.is_array() || r.size() != 2) {
            throw std::invalid_argument("events_per_class must be [min, max]");
        }
        spec.min_events_per_class = r[0].get<int>();
        spec.max_events_per_class = r[1].get<int>();
    }
    if (json.contains("min_separation_frames")) {
        spec.min_separation_frames = json.at("min_separation_frames").get<int>();
    }
    if (json.contains("noise_sigma")) spec.noise_sigma = json.at("noise_sigma").get<double>();
    if (json.contains("noise_truncation_sigmas")) {
        spec.noise_truncation_sigmas = json.at("noise_truncation_sigmas").get<double>();
    }
    if (json.contains("event_level")) spec.event_level = json.at("event_level").get<double>();
    if (json.contains("floor_level")) spec.floor_level = json.at("floor_level").get<double>();
    validate(spec);
    return spec;
}

std::string synth_spec_to_json_text(const SynthSpec& spec) {
    nlohmann::json json;
    json["seed"] = spec.seed;
    json["clip_length_seconds"] = spec.clip_length_seconds;
    json["base_hop_seconds"] = spec.grid.base_hop;
    json["factor"] = spec.grid.factor;
    json["classes"] = spec.classes.labels();
    nlohmann::json durations = nlohmann::json::object();
    for (const auto& [label, range] : spec.durations) {
        durations[label] = {range.min_seconds, range.max_seconds};
    }
    json["durations"] = durations;
    json["default_duration"] = {spec.default_duration.min_seconds,
                                spec.default_duration.max_seconds};
    json["events_per_class"] = {spec.min_events_per_class, spec.max_events_per_class};
    json["min_separation_frames"] = spec.min_separation_frames;
    json["noise_sigma"] = spec.noise_sigma;
    json["noise_truncation_sigmas"] = spec.noise_truncation_sigmas;
    json["event_level"] = spec.event_level;
    json["floor_level"] = spec.floor_level;
    return json.dump(2);
}

BinaryMask events_to_mask(const EventList& events, const TimeGrid& grid,
                          const ClassMap& classes, std::size_t frames) {
    validate(grid);
    const double span_end = frame_to_seconds(frames, grid);
    BinaryMask mask(events.clip_id(), frames, classes, grid);
    for (const Event& event : events.events()) {
        const std::size_t c = classes.index_of(event.label);
        if (event.onset < 0.0 || event.offset > span_end) {
            throw std::invalid_argument("event outside the grid: " + event.label);
        }
        // Candidate frame range from arithmetic, then the exact overlap
        // predicate on frame_to_seconds boundaries.
        const double hop = grid.hop();
        const std::size_t lo = static_cast<std::size_t>(
            std::max(0.0, std::floor(event.onset / hop) - 1.0));
        const std::size_t hi = std::min(
            frames, static_cast<std::size_t>(std::ceil(event.offset / hop) + 1.0));
        for (std::size_t t = lo; t < hi; ++t) {
            const double frame_start = frame_to_seconds(t, grid);
            const double frame_end = frame_to_seconds(t + 1, grid);
            if (event.onset < frame_end && event.offset > frame_start) {
                mask.set(t, c, true);
            }
        }
    }
    return mask;
}

SynthOutput generate(const SynthSpec& spec, int n_clips) {
    validate(spec);
    if (n_clips < 1) {
        throw std::invalid_argument("n_clips must be >= 1");
    }
    const std::size_t frames = static_cast<std::size_t>(
        std::llround(spec.clip_length_seconds / spec.grid.hop()));
    if (frames == 0) {
        throw std::invalid_argument("clip length shorter than one frame");
    }

    SynthOutput out;
    for (int i = 0; i < n_clips; ++i) {
        SplitMix64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
        const std::string clip_id = clip_name(i);

        std::vector<Event> events;
        for (const std::string& label : spec.classes.labels()) {
            for (const auto& [start, end] :
                 place_events(rng, spec, range_for(spec, label), frames)) {
                events.push_back(Event{label, frame_to_seconds(start, spec.grid),
                                       frame_to_seconds(end, spec.grid)});
            }
        }
        EventList list(clip_id, std::move(events));
        const BinaryMask mask = events_to_mask(list, spec.grid, spec.classes, frames);

        PosteriorClip clip;
        clip.clip_id = clip_id;
        clip.grid = spec.grid;
        clip.classes = spec.classes;
        clip.probs = Matrix(frames, spec.classes.size());
        const double bound = spec.noise_truncation_sigmas * spec.noise_sigma;
        for (std::size_t t = 0; t < frames; ++t) {
            for (std::size_t c = 0; c < spec.classes.size(); ++c) {
                double v = mask.at(t, c) ? spec.event_level : spec.floor_level;
                if (spec.noise_sigma > 0.0) {
                    const double noise = std::clamp(spec.noise_sigma * rng.gaussian(),
                                                    -bound, bound);
                    v = std::clamp(v + noise, 0.0, 1.0);
                }
                clip.probs(t, c) = v;
            }
        }
        out.ground_truth.emplace(clip_id, std::move(list));
        out.posteriors.push_back(std::move(clip));
    }
    return out;
}

}  // namespace sedkit
