// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#include "sedkit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "sedkit/decode.hpp"
#include "sedkit/io.hpp"

namespace sedkit {

void validate(const PostprocessSettings& settings) {
    if (settings.method == PostMethod::median) {
        validate(settings.median);
    } else {
        validate(settings.double_threshold);
    }
}

BinaryMask apply_postprocess(const PosteriorClip& clip,
                             const PostprocessSettings& settings) {
    if (settings.method == PostMethod::median) {
        return median_filter(clip, settings.median);
    }
    return double_threshold(clip, settings.double_threshold);
}

EventCorpus decode_posteriors(std::span<const PosteriorClip> clips,
                              const PostprocessSettings& settings, int jobs) {
    validate(settings);
    if (jobs < 1) {
        throw std::invalid_argument("jobs must be >= 1");
    }

    std::vector<EventList> decoded(clips.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= clips.size()) {
                return;
            }
            try {
                decoded[i] = mask_to_events(apply_postprocess(clips[i], settings));
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                return;
            }
        }
    };

    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(1, clips.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    EventCorpus corpus;
    for (EventList& list : decoded) {
        const std::string id = list.clip_id();
        if (!corpus.emplace(id, std::move(list)).second) {
            throw std::invalid_argument("duplicate clip id in posterior set: " + id);
        }
    }
    return corpus;
}

void validate(const PipelineConfig& config) {
    if (config.posterior_files.empty()) {
        throw std::invalid_argument("pipeline config names no posterior inputs");
    }
    if (config.ground_truth.empty()) {
        throw std::invalid_argument("pipeline config names no ground truth");
    }
    validate(config.post);
    validate(config.eval);
    if (config.jobs < 1) {
        throw std::invalid_argument("jobs must be >= 1");
    }
}

PipelineConfig pipeline_config_from_json_text(const std::string& text,
                                              const std::filesystem::path& base_dir) {
    const auto json = nlohmann::json::parse(text);
    PipelineConfig config;

    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };

    if (json.contains("posteriors")) {
        for (const auto& entry : json.at("posteriors")) {
            config.posterior_files.push_back(resolve(entry.get<std::string>()));
        }
    }
    if (json.contains("posterior_dir")) {
        const auto found =
            io::list_posterior_files(resolve(json.at("posterior_dir").get<std::string>()));
        config.posterior_files.insert(config.posterior_files.end(), found.begin(),
                                      found.end());
    }
    if (json.contains("ground_truth")) {
        config.ground_truth = resolve(json.at("ground_truth").get<std::string>());
    }

    if (json.contains("post")) {
        const auto& post = json.at("post");
        const std::string method = post.value("method", "double");
        if (method == "median") {
            config.post.method = PostMethod::median;
        } else if (method == "double") {
            config.post.method = PostMethod::double_threshold;
        } else {
            throw std::invalid_argument("unknown post-processing method: " + method);
        }
        if (post.contains("phi")) config.post.median.phi = post.at("phi").get<double>();
        if (post.contains("omega")) {
            config.post.median.omega = post.at("omega").get<int>();
            config.post.double_threshold.omega = post.at("omega").get<int>();
        }
        if (post.contains("phi_low")) {
            config.post.double_threshold.phi_low = post.at("phi_low").get<double>();
        }
        if (post.contains("phi_hi")) {
            config.post.double_threshold.phi_hi = post.at("phi_hi").get<double>();
        }
    }

    if (json.contains("eval")) {
        const auto& ev = json.at("eval");
        if (ev.contains("t_collar")) config.eval.t_collar = ev.at("t_collar").get<double>();
        if (ev.contains("offset_ratio")) {
            config.eval.offset_ratio = ev.at("offset_ratio").get<double>();
        }
        if (ev.contains("buckets")) {
            config.eval.buckets = buckets_from_json_text(ev.at("buckets").dump());
        } else if (ev.contains("buckets_file")) {
            config.eval.buckets = buckets_from_json_text(
                io::read_text_file(resolve(ev.at("buckets_file").get<std::string>())));
        }
    }

    if (json.contains("output_events")) {
        config.output_events = resolve(json.at("output_events").get<std::string>());
    }
    if (json.contains("output_report")) {
        config.output_report = resolve(json.at("output_report").get<std::string>());
    }
    if (json.contains("jobs")) {
        config.jobs = json.at("jobs").get<int>();
    }
    return config;
}

PipelineResult run_pipeline(std::span<const PosteriorClip> clips,
                            const EventCorpus& ground_truth,
                            const PostprocessSettings& post, const EvalParams& eval_params,
                            int jobs) {
    if (clips.empty()) {
        throw std::invalid_argument("pipeline requires at least one posterior clip");
    }
    const ClassMap& classes = clips.front().classes;
    for (const PosteriorClip& clip : clips) {
        if (clip.classes != classes) {
            throw std::invalid_argument("pipeline clips must share one class map");
        }
    }

    EvalParams params = eval_params;
    if (params.buckets.empty()) {
        // Use the built-in duration buckets when they cover every class.
        const auto defaults = default_buckets();
        bool covered = true;
        for (const std::string& label : classes.labels()) {
            if (!defaults.count(label)) {
                covered = false;
                break;
            }
        }
        if (covered) {
            params.buckets = defaults;
        }
    }

    PipelineResult result;
    result.decoded = decode_posteriors(clips, post, jobs);
    result.report = score(ground_truth, result.decoded, classes, params);
    result.report_json = report_to_json(result.report, params);
    return result;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    validate(config);

    std::vector<PosteriorClip> clips;
    clips.reserve(config.posterior_files.size());
    for (const auto& path : config.posterior_files) {
        clips.push_back(io::read_posterior(path));
    }
    const EventCorpus ground_truth = io::read_annotations(config.ground_truth);

    PipelineResult result =
        run_pipeline(clips, ground_truth, config.post, config.eval, config.jobs);

    if (config.output_events) {
        io::write_annotations(result.decoded, *config.output_events);
    }
    if (config.output_report) {
        io::write_text_file(*config.output_report, result.report_json + "\n");
    }
    return result;
}

}  // namespace sedkit
