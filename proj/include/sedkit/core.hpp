// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace sedkit {

/// Ordered set of class labels; column c of a posterior matrix corresponds
/// to labels()[c].
class ClassMap {
public:
    ClassMap() = default;
    explicit ClassMap(std::vector<std::string> labels);

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(std::size_t index) const { return labels_.at(index); }

    bool contains(const std::string& label) const { return index_.count(label) > 0; }
    std::size_t index_of(const std::string& label) const;

    bool operator==(const ClassMap& other) const { return labels_ == other.labels_; }
    bool operator!=(const ClassMap& other) const { return !(*this == other); }

    /// The ten DCASE2018 task 4 domestic classes.
    static ClassMap dcase2018();

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Frame timing: seconds per frame at factor 1, times an integer
/// subsampling factor. Effective hop = base_hop * factor.
struct TimeGrid {
    double base_hop = 0.020;
    int factor = 1;

    double hop() const { return base_hop * factor; }
    bool operator==(const TimeGrid&) const = default;
};

void validate(const TimeGrid& grid);

/// Start time in seconds of frame `index` on `grid`.
double frame_to_seconds(std::size_t index, const TimeGrid& grid);

/// Dense row-major matrix of doubles (rows = frames, cols = classes or
/// feature bins).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data_.data() + r * cols_, cols_);
    }
    std::vector<double> column(std::size_t c) const;

    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Per-frame class probabilities for one clip.
struct PosteriorClip {
    std::string clip_id;
    Matrix probs;  // T x C, entries in [0,1]
    TimeGrid grid;
    ClassMap classes;
};

/// Checks all PosteriorClip invariants; returns the first violation found,
/// or nullopt when the clip is valid.
std::optional<std::string> validate_clip(const PosteriorClip& clip);

/// A labelled time interval, in seconds. Offsets are exclusive.
struct Event {
    std::string label;
    double onset = 0.0;
    double offset = 0.0;

    bool operator==(const Event&) const = default;
};

void validate(const Event& event);

/// Events of one clip, sorted by (onset, label). Same-class events that
/// touch or overlap are merged on construction.
class EventList {
public:
    EventList() = default;
    EventList(std::string clip_id, std::vector<Event> events);

    const std::string& clip_id() const { return clip_id_; }
    const std::vector<Event>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }

    bool operator==(const EventList&) const = default;

private:
    std::string clip_id_;
    std::vector<Event> events_;
};

/// Event lists keyed by clip id.
using EventCorpus = std::map<std::string, EventList>;

}  // namespace sedkit
