// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sedkit/core.hpp"

namespace sedkit {

enum class Bucket { short_events, long_events };

struct EvalParams {
    double t_collar = 0.200;
    double offset_ratio = 0.20;
    // Class -> duration bucket; empty disables the short/long section.
    std::map<std::string, Bucket> buckets;
};

void validate(const EvalParams& params);

struct ClassCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
};

struct ClassScore {
    ClassCounts counts;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    // In class-map order.
    std::vector<std::pair<std::string, ClassScore>> per_class;
    double macro_f1 = 0.0;
    std::optional<double> short_f1;
    std::optional<double> long_f1;
    std::optional<double> gap;  // |long_f1 - short_f1|
};

/// True when prediction and reference align within the collar:
/// |onset difference| <= t_collar and |offset difference| <=
/// max(t_collar, offset_ratio * reference duration).
bool events_match(const Event& reference, const Event& prediction,
                  const EvalParams& params);

/// Greedy one-to-one matching per class: references in onset order each take
/// the first compatible unmatched prediction in onset order. Returns counts
/// for every class present in either list.
std::map<std::string, ClassCounts> match_events(const EventList& reference,
                                                const EventList& prediction,
                                                const EvalParams& params);

/// Accumulates counts over all clips (union of clip ids; a clip missing from
/// one corpus contributes an empty list) and derives per-class P/R/F1.
/// Macro F1 averages the classes with at least one event on either side;
/// bucket F1s average the same way within each bucket. Labels outside the
/// class map throw.
EvalReport score(const EventCorpus& references, const EventCorpus& predictions,
                 const ClassMap& classes, const EvalParams& params);

/// The DCASE2018 split by typical event duration.
std::map<std::string, Bucket> default_buckets();

/// Parses {"short": [labels...], "long": [labels...]}.
std::map<std::string, Bucket> buckets_from_json_text(const std::string& text);

/// Alternative grouping by clip rather than class: clips whose mean
/// reference event duration is <= threshold form the short group. Reported
/// figures are the macro F1 of each group scored separately.
struct ClipDurationSplit {
    double short_f1 = 0.0;
    double long_f1 = 0.0;
    double gap = 0.0;
    std::size_t short_clips = 0;
    std::size_t long_clips = 0;
};

ClipDurationSplit score_by_clip_duration(const EventCorpus& references,
                                         const EventCorpus& predictions,
                                         const ClassMap& classes,
                                         const EvalParams& params,
                                         double threshold_seconds);

/// 4-decimal JSON serialization (stable golden files) and a plain table.
std::string report_to_json(const EvalReport& report, const EvalParams& params);
std::string report_to_table(const EvalReport& report);

double f1_from_counts(const ClassCounts& counts);

}  // namespace sedkit
