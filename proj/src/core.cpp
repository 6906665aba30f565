// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#include "sedkit/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sedkit {

ClassMap::ClassMap(std::vector<std::string> labels) : labels_(std::move(labels)) {
    index_.reserve(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].empty()) {
            throw std::invalid_argument("class label must be non-empty");
        }
        auto [it, inserted] = index_.emplace(labels_[i], i);
        if (!inserted) {
            throw std::invalid_argument("duplicate class label: " + labels_[i]);
        }
    }
}

std::size_t ClassMap::index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) {
        throw std::invalid_argument("unknown class label: " + label);
    }
    return it->second;
}

ClassMap ClassMap::dcase2018() {
    return ClassMap({
        "Alarm bell",
        "Blender",
        "Cat",
        "Dishes",
        "Dog",
        "Electric shaver toothbrush",
        "Frying",
        "Running water",
        "Speech",
        "Vacuum cleaner",
    });
}

void validate(const TimeGrid& grid) {
    if (!(grid.base_hop > 0.0) || !std::isfinite(grid.base_hop)) {
        throw std::invalid_argument("time grid base_hop must be positive");
    }
    if (grid.factor < 1) {
        throw std::invalid_argument("time grid factor must be >= 1");
    }
}

double frame_to_seconds(std::size_t index, const TimeGrid& grid) {
    return static_cast<double>(index) * grid.base_hop * grid.factor;
}

std::vector<double> Matrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        out[r] = (*this)(r, c);
    }
    return out;
}

std::optional<std::string> validate_clip(const PosteriorClip& clip) {
    try {
        validate(clip.grid);
    } catch (const std::exception& e) {
        return std::string(e.what());
    }
    if (clip.probs.rows() == 0 || clip.probs.cols() == 0) {
        return "empty probability matrix";
    }
    if (clip.probs.cols() != clip.classes.size()) {
        std::ostringstream msg;
        msg << "class dimension mismatch: matrix has " << clip.probs.cols()
            << " columns, class map has " << clip.classes.size();
        return msg.str();
    }
    for (std::size_t t = 0; t < clip.probs.rows(); ++t) {
        for (std::size_t c = 0; c < clip.probs.cols(); ++c) {
            const double v = clip.probs(t, c);
            if (!(v >= 0.0 && v <= 1.0)) {
                std::ostringstream msg;
                msg << "probability out of range at frame " << t << ", class "
                    << clip.classes.label(c) << ": " << v;
                return msg.str();
            }
        }
    }
    return std::nullopt;
}

void validate(const Event& event) {
    if (!(event.onset >= 0.0) || !(event.onset < event.offset) ||
        !std::isfinite(event.onset) || !std::isfinite(event.offset)) {
        throw std::invalid_argument("event must satisfy 0 <= onset < offset (label: " +
                                    event.label + ")");
    }
    if (event.label.empty()) {
        throw std::invalid_argument("event label must be non-empty");
    }
}

EventList::EventList(std::string clip_id, std::vector<Event> events)
    : clip_id_(std::move(clip_id)) {
    for (const Event& e : events) {
        validate(e);
    }
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        return std::tie(a.onset, a.label, a.offset) < std::tie(b.onset, b.label, b.offset);
    });
    // Merge same-class events that touch or overlap; the metric and the
    // decoders assume disjoint same-class events.
    for (const Event& e : events) {
        Event* open = nullptr;
        for (auto it = events_.rbegin(); it != events_.rend(); ++it) {
            if (it->label == e.label) {
                open = &*it;
                break;
            }
        }
        if (open != nullptr && e.onset <= open->offset) {
            open->offset = std::max(open->offset, e.offset);
        } else {
            events_.push_back(e);
        }
    }
    std::stable_sort(events_.begin(), events_.end(), [](const Event& a, const Event& b) {
        return std::tie(a.onset, a.label, a.offset) < std::tie(b.onset, b.label, b.offset);
    });
}

}  // namespace sedkit
