// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "sedkit/core.hpp"
#include "sedkit/eval.hpp"
#include "sedkit/postprocess.hpp"

namespace sedkit {

enum class PostMethod { median, double_threshold };

struct PostprocessSettings {
    PostMethod method = PostMethod::double_threshold;
    MedianFilterParams median;
    DoubleThresholdParams double_threshold;
};

void validate(const PostprocessSettings& settings);
BinaryMask apply_postprocess(const PosteriorClip& clip, const PostprocessSettings& settings);

/// Post-processes and decodes every clip. Clips are distributed over
/// `jobs` worker threads; the result is keyed (and therefore ordered) by
/// clip_id regardless of schedule.
EventCorpus decode_posteriors(std::span<const PosteriorClip> clips,
                              const PostprocessSettings& settings, int jobs);

struct PipelineConfig {
    std::vector<std::filesystem::path> posterior_files;
    std::filesystem::path ground_truth;
    PostprocessSettings post;
    EvalParams eval;
    std::optional<std::filesystem::path> output_events;
    std::optional<std::filesystem::path> output_report;
    int jobs = 1;
};

void validate(const PipelineConfig& config);

/// Parses the pipeline JSON config. `base_dir` resolves relative paths.
PipelineConfig pipeline_config_from_json_text(const std::string& text,
                                              const std::filesystem::path& base_dir);

struct PipelineResult {
    EventCorpus decoded;
    EvalReport report;
    std::string report_json;
};

/// postprocess -> decode -> eval; writes the decoded annotation TSV and the
/// JSON report when the config names output paths.
PipelineResult run_pipeline(const PipelineConfig& config);

/// In-memory variant used by tests and the acceptance suite.
PipelineResult run_pipeline(std::span<const PosteriorClip> clips,
                            const EventCorpus& ground_truth,
                            const PostprocessSettings& post, const EvalParams& eval_params,
                            int jobs);

}  // namespace sedkit
