// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#include "sedkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sedkit {
namespace {

double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

struct Derived {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

Derived derive(const ClassCounts& c) {
    Derived d;
    if (c.tp + c.fp > 0) {
        d.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    }
    if (c.tp + c.fn > 0) {
        d.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    }
    if (d.precision + d.recall > 0.0) {
        d.f1 = 2.0 * d.precision * d.recall / (d.precision + d.recall);
    }
    return d;
}

std::vector<const Event*> events_of_class(const EventList& list, const std::string& label) {
    std::vector<const Event*> out;
    for (const Event& e : list.events()) {
        if (e.label == label) {
            out.push_back(&e);
        }
    }
    return out;
}

}  // namespace

void validate(const EvalParams& params) {
    if (!(params.t_collar > 0.0)) {
        throw std::invalid_argument("t_collar must be positive");
    }
    if (!(params.offset_ratio > 0.0 && params.offset_ratio <= 1.0)) {
        throw std::invalid_argument("offset_ratio must lie in (0,1]");
    }
}

double f1_from_counts(const ClassCounts& counts) { return derive(counts).f1; }

bool events_match(const Event& reference, const Event& prediction,
                  const EvalParams& params) {
    if (reference.label != prediction.label) {
        return false;
    }
    if (std::abs(prediction.onset - reference.onset) > params.t_collar) {
        return false;
    }
    const double offset_tolerance =
        std::max(params.t_collar, params.offset_ratio * (reference.offset - reference.onset));
    return std::abs(prediction.offset - reference.offset) <= offset_tolerance;
}

std::map<std::string, ClassCounts> match_events(const EventList& reference,
                                                const EventList& prediction,
                                                const EvalParams& params) {
    validate(params);
    std::set<std::string> labels;
    for (const Event& e : reference.events()) {
        labels.insert(e.label);
    }
    for (const Event& e : prediction.events()) {
        labels.insert(e.label);
    }

    std::map<std::string, ClassCounts> counts;
    for (const std::string& label : labels) {
        const auto refs = events_of_class(reference, label);
        const auto preds = events_of_class(prediction, label);
        std::vector<bool> pred_used(preds.size(), false);

        ClassCounts& c = counts[label];
        for (const Event* ref : refs) {
            bool matched = false;
            for (std::size_t j = 0; j < preds.size(); ++j) {
                if (pred_used[j]) {
                    continue;
                }
                if (events_match(*ref, *preds[j], params)) {
                    pred_used[j] = true;
                    matched = true;
                    break;
                }
            }
            if (matched) {
                ++c.tp;
            } else {
                ++c.fn;
            }
        }
        for (std::size_t j = 0; j < preds.size(); ++j) {
            if (!pred_used[j]) {
                ++c.fp;
            }
        }
    }
    return counts;
}

EvalReport score(const EventCorpus& references, const EventCorpus& predictions,
                 const ClassMap& classes, const EvalParams& params) {
    validate(params);

    std::set<std::string> clip_ids;
    for (const auto& [id, list] : references) {
        clip_ids.insert(id);
    }
    for (const auto& [id, list] : predictions) {
        clip_ids.insert(id);
    }

    std::map<std::string, ClassCounts> totals;
    const EventList empty;
    for (const std::string& id : clip_ids) {
        const auto ref_it = references.find(id);
        const auto pred_it = predictions.find(id);
        const EventList& ref = ref_it != references.end() ? ref_it->second : empty;
        const EventList& pred = pred_it != predictions.end() ? pred_it->second : empty;
        for (const auto& [label, counts] : match_events(ref, pred, params)) {
            if (!classes.contains(label)) {
                throw std::invalid_argument("unknown class label in corpus: " + label);
            }
            ClassCounts& total = totals[label];
            total.tp += counts.tp;
            total.fp += counts.fp;
            total.fn += counts.fn;
        }
    }

    EvalReport report;
    double f1_sum = 0.0;
    std::size_t active = 0;
    std::map<Bucket, std::pair<double, std::size_t>> bucket_sums;
    for (const std::string& label : classes.labels()) {
        const ClassCounts counts = totals.count(label) ? totals[label] : ClassCounts{};
        const Derived d = derive(counts);
        report.per_class.emplace_back(
            label, ClassScore{counts, d.precision, d.recall, d.f1});
        if (counts.tp + counts.fp + counts.fn > 0) {
            f1_sum += d.f1;
            ++active;
            if (!params.buckets.empty()) {
                const auto it = params.buckets.find(label);
                if (it == params.buckets.end()) {
                    throw std::invalid_argument("class missing from bucket map: " + label);
                }
                auto& [sum, count] = bucket_sums[it->second];
                sum += d.f1;
                ++count;
            }
        }
    }
    report.macro_f1 = active > 0 ? f1_sum / static_cast<double>(active) : 0.0;

    if (!params.buckets.empty()) {
        auto bucket_f1 = [&](Bucket b) {
            const auto it = bucket_sums.find(b);
            if (it == bucket_sums.end() || it->second.second == 0) {
                return 0.0;
            }
            return it->second.first / static_cast<double>(it->second.second);
        };
        report.short_f1 = bucket_f1(Bucket::short_events);
        report.long_f1 = bucket_f1(Bucket::long_events);
        report.gap = std::abs(*report.long_f1 - *report.short_f1);
    }
    return report;
}

std::map<std::string, Bucket> default_buckets() {
    std::map<std::string, Bucket> buckets;
    for (const char* label : {"Speech", "Dog", "Dishes", "Cat", "Alarm bell"}) {
        buckets[label] = Bucket::short_events;
    }
    for (const char* label : {"Vacuum cleaner", "Running water", "Frying",
                              "Electric shaver toothbrush", "Blender"}) {
        buckets[label] = Bucket::long_events;
    }
    return buckets;
}

std::map<std::string, Bucket> buckets_from_json_text(const std::string& text) {
    const auto json = nlohmann::json::parse(text);
    std::map<std::string, Bucket> buckets;
    auto load = [&](const char* key, Bucket bucket) {
        if (!json.contains(key)) {
            return;
        }
        for (const auto& label : json.at(key)) {
            const std::string name = label.get<std::string>();
            if (buckets.count(name)) {
                throw std::invalid_argument("class appears in both buckets: " + name);
            }
            buckets[name] = bucket;
        }
    };
    load("short", Bucket::short_events);
    load("long", Bucket::long_events);
    if (buckets.empty()) {
        throw std::invalid_argument("bucket file defines no classes");
    }
    return buckets;
}

ClipDurationSplit score_by_clip_duration(const EventCorpus& references,
                                         const EventCorpus& predictions,
                                         const ClassMap& classes,
                                         const EvalParams& params,
                                         double threshold_seconds) {
    EventCorpus short_refs, long_refs, short_preds, long_preds;
    for (const auto& [id, list] : references) {
        double total = 0.0;
        for (const Event& e : list.events()) {
            total += e.offset - e.onset;
        }
        const double mean_duration =
            list.empty() ? 0.0 : total / static_cast<double>(list.size());
        const bool is_short = mean_duration <= threshold_seconds;
        (is_short ? short_refs : long_refs).emplace(id, list);
        const auto pred_it = predictions.find(id);
        if (pred_it != predictions.end()) {
            (is_short ? short_preds : long_preds).emplace(id, pred_it->second);
        }
    }

    EvalParams plain = params;
    plain.buckets.clear();
    ClipDurationSplit split;
    split.short_clips = short_refs.size();
    split.long_clips = long_refs.size();
    split.short_f1 = score(short_refs, short_preds, classes, plain).macro_f1;
    split.long_f1 = score(long_refs, long_preds, classes, plain).macro_f1;
    split.gap = std::abs(split.long_f1 - split.short_f1);
    return split;
}

std::string report_to_json(const EvalReport& report, const EvalParams& params) {
    nlohmann::json json;
    json["t_collar"] = params.t_collar;
    json["offset_ratio"] = params.offset_ratio;
    nlohmann::json per_class = nlohmann::json::object();
    for (const auto& [label, s] : report.per_class) {
        per_class[label] = {
            {"tp", s.counts.tp},           {"fp", s.counts.fp},
            {"fn", s.counts.fn},           {"precision", round4(s.precision)},
            {"recall", round4(s.recall)},  {"f1", round4(s.f1)},
        };
    }
    json["classes"] = per_class;
    json["macro_f1"] = round4(report.macro_f1);
    if (report.short_f1) {
        json["short_f1"] = round4(*report.short_f1);
        json["long_f1"] = round4(*report.long_f1);
        json["gap"] = round4(*report.gap);
    }
    return json.dump(2);
}

std::string report_to_table(const EvalReport& report) {
    std::size_t width = 5;
    for (const auto& [label, s] : report.per_class) {
        width = std::max(width, label.size());
    }
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-*s %6s %6s %6s %9s %9s %9s\n",
                  static_cast<int>(width), "class", "tp", "fp", "fn", "precision",
                  "recall", "f1");
    out << line;
    for (const auto& [label, s] : report.per_class) {
        std::snprintf(line, sizeof(line), "%-*s %6lld %6lld %6lld %9.4f %9.4f %9.4f\n",
                      static_cast<int>(width), label.c_str(),
                      static_cast<long long>(s.counts.tp),
                      static_cast<long long>(s.counts.fp),
                      static_cast<long long>(s.counts.fn), s.precision, s.recall, s.f1);
        out << line;
    }
    std::snprintf(line, sizeof(line), "macro_f1 %.4f\n", report.macro_f1);
    out << line;
    if (report.short_f1) {
        std::snprintf(line, sizeof(line), "short_f1 %.4f\nlong_f1  %.4f\ngap      %.4f\n",
                      *report.short_f1, *report.long_f1, *report.gap);
        out << line;
    }
    return out.str();
}

}  // namespace sedkit
