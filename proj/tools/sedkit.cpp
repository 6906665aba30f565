// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0
//
// sedkit: weakly supervised sound event detection decoding toolkit.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sedkit/decode.hpp"
#include "sedkit/eval.hpp"
#include "sedkit/io.hpp"
#include "sedkit/pipeline.hpp"
#include "sedkit/pooling.hpp"
#include "sedkit/subsample.hpp"
#include "sedkit/synth.hpp"

namespace {

using namespace sedkit;

void emit(const std::string& text, const std::string& output_path) {
    if (output_path.empty() || output_path == "-") {
        std::cout << text;
    } else {
        io::write_text_file(output_path, text);
    }
}

std::vector<PosteriorClip> read_posterior_set(const std::vector<std::string>& files,
                                              const std::string& directory) {
    std::vector<std::filesystem::path> paths;
    for (const auto& f : files) {
        paths.emplace_back(f);
    }
    if (!directory.empty()) {
        const auto found = io::list_posterior_files(directory);
        paths.insert(paths.end(), found.begin(), found.end());
    }
    if (paths.empty()) {
        throw std::invalid_argument("no posterior files given");
    }
    std::vector<PosteriorClip> clips;
    clips.reserve(paths.size());
    for (const auto& p : paths) {
        clips.push_back(io::read_posterior(p));
    }
    return clips;
}

struct PostFlags {
    std::string method = "double";
    double phi = 0.5;
    int omega = 1;
    double phi_low = 0.2;
    double phi_hi = 0.75;
    CLI::Option* omega_opt = nullptr;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--post", method, "Post-processing method: median|double")
            ->check(CLI::IsMember({"median", "double"}))
            ->capture_default_str();
        cmd.add_option("--phi", phi, "Median filter threshold")->capture_default_str();
        omega_opt = cmd.add_option(
            "--omega", omega,
            "Median window size (default 51) / double-threshold connect window "
            "(default 1)");
        cmd.add_option("--phi-low", phi_low, "Double threshold low value")
            ->capture_default_str();
        cmd.add_option("--phi-hi", phi_hi, "Double threshold high value")
            ->capture_default_str();
    }

    PostprocessSettings settings() const {
        PostprocessSettings s;
        s.method = method == "median" ? PostMethod::median : PostMethod::double_threshold;
        s.median.phi = phi;
        s.double_threshold.phi_low = phi_low;
        s.double_threshold.phi_hi = phi_hi;
        if (omega_opt != nullptr && omega_opt->count() > 0) {
            s.median.omega = omega;
            s.double_threshold.omega = omega;
        }
        validate(s);
        return s;
    }
};

int run_pool(const std::string& kind_name, const std::string& input,
             const std::string& output) {
    const auto kind = pooling_kind_from_string(kind_name);
    if (!kind) {
        throw std::invalid_argument("unknown pooling kind: " + kind_name);
    }
    const PosteriorClip clip = io::read_posterior(input);
    const auto pooled = pool_columns(clip, *kind);
    std::string text = "label\tprobability\n";
    for (std::size_t c = 0; c < clip.classes.size(); ++c) {
        text += clip.classes.label(c) + "\t" + io::format_value(pooled[c]) + "\n";
    }
    emit(text, output);
    return 0;
}

int run_gradcheck(const std::string& kind_name, int trials, std::uint64_t seed,
                  double alpha, double p, std::size_t kernel_size) {
    SubsampleKind kind;
    if (kind_name == "mm") {
        kind = MeanMax{};
    } else if (kind_name == "amm") {
        kind = AlphaMeanMax{alpha};
    } else if (kind_name == "lp") {
        kind = LpPool{p};
    } else if (kind_name == "conv") {
        kind = ConvPool::seeded_random(kernel_size, seed);
    } else {
        throw std::invalid_argument("unknown subsampling kind: " + kind_name);
    }
    const GradcheckReport report = gradcheck(kind, trials, seed);
    nlohmann::json json;
    json["kind"] = report.kind;
    json["trials"] = report.trials;
    json["seed"] = report.seed;
    json["max_relative_error"] = report.max_relative_error;
    json["tolerance"] = report.tolerance;
    json["pass"] = report.pass;
    std::cout << json.dump(2) << "\n";
    return report.pass ? 0 : 1;
}

int run_decode(const std::vector<std::string>& inputs, const std::string& directory,
               const PostFlags& post, const std::string& output, int jobs) {
    const auto clips = read_posterior_set(inputs, directory);
    const EventCorpus decoded = decode_posteriors(clips, post.settings(), jobs);
    if (output.empty() || output == "-") {
        std::ostringstream buffer;
        for (const auto& [clip_id, list] : decoded) {
            for (const Event& e : list.events()) {
                buffer << clip_id << '\t' << io::format_seconds(e.onset) << '\t'
                       << io::format_seconds(e.offset) << '\t' << e.label << '\n';
            }
        }
        std::cout << "filename\tonset\toffset\tevent_label\n" << buffer.str();
    } else {
        io::write_annotations(decoded, output);
    }
    return 0;
}

int run_fuse(const std::vector<std::string>& inputs, const std::string& output) {
    std::vector<PosteriorClip> clips;
    clips.reserve(inputs.size());
    for (const auto& p : inputs) {
        clips.push_back(io::read_posterior(p));
    }
    const PosteriorClip fused = fuse(clips);
    io::write_posterior(fused, output);
    return 0;
}

int run_eval(const std::string& ref_path, const std::string& pred_path, double t_collar,
             double offset_ratio, const std::string& buckets_path,
             const std::string& classes_path, const std::string& format,
             const std::string& json_out, std::optional<double> clip_split_seconds) {
    const EventCorpus refs = io::read_annotations(ref_path);
    const EventCorpus preds = io::read_annotations(pred_path);

    ClassMap classes;
    if (!classes_path.empty()) {
        const auto parsed = nlohmann::json::parse(io::read_text_file(classes_path));
        classes = ClassMap(parsed.get<std::vector<std::string>>());
    } else {
        std::set<std::string> labels;
        for (const auto* corpus : {&refs, &preds}) {
            for (const auto& [id, list] : *corpus) {
                for (const Event& e : list.events()) {
                    labels.insert(e.label);
                }
            }
        }
        classes = ClassMap(std::vector<std::string>(labels.begin(), labels.end()));
    }

    EvalParams params;
    params.t_collar = t_collar;
    params.offset_ratio = offset_ratio;
    if (!buckets_path.empty()) {
        params.buckets = buckets_from_json_text(io::read_text_file(buckets_path));
    } else {
        const auto defaults = default_buckets();
        bool covered = classes.size() > 0;
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

    const EvalReport report = score(refs, preds, classes, params);
    std::string json_text = report_to_json(report, params);

    if (clip_split_seconds) {
        const auto split =
            score_by_clip_duration(refs, preds, classes, params, *clip_split_seconds);
        auto json = nlohmann::json::parse(json_text);
        json["clip_duration_split"] = {
            {"threshold_seconds", *clip_split_seconds},
            {"short_f1", std::round(split.short_f1 * 10000.0) / 10000.0},
            {"long_f1", std::round(split.long_f1 * 10000.0) / 10000.0},
            {"gap", std::round(split.gap * 10000.0) / 10000.0},
            {"short_clips", split.short_clips},
            {"long_clips", split.long_clips},
        };
        json_text = json.dump(2);
    }

    if (format == "table" || format == "both") {
        std::cout << report_to_table(report);
    }
    if (!json_out.empty()) {
        io::write_text_file(json_out, json_text + "\n");
    } else if (format == "json" || format == "both") {
        std::cout << json_text << "\n";
    }
    return 0;
}

int run_synth(const std::string& spec_path, const std::string& out_dir, int n_clips,
              std::optional<std::uint64_t> seed_override) {
    SynthSpec spec = spec_path.empty()
                         ? SynthSpec{}
                         : synth_spec_from_json_text(io::read_text_file(spec_path));
    if (seed_override) {
        spec.seed = *seed_override;
    }
    validate(spec);
    const SynthOutput output = generate(spec, n_clips);

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    for (const PosteriorClip& clip : output.posteriors) {
        io::write_posterior(clip, dir / (clip.clip_id + ".tsv"));
    }
    io::write_annotations(output.ground_truth, dir / "ground_truth.tsv");
    std::cout << "wrote " << output.posteriors.size() << " clips to " << dir.string()
              << "\n";
    return 0;
}

int run_pipeline_cmd(const std::string& config_path,
                     const std::vector<std::string>& inputs, const std::string& directory,
                     const std::string& ground_truth, const PostFlags& post,
                     bool post_given, double t_collar, bool t_collar_given,
                     double offset_ratio, bool offset_ratio_given,
                     const std::string& buckets_path, const std::string& out_events,
                     const std::string& out_report, int jobs, bool jobs_given,
                     const std::string& format) {
    PipelineConfig config;
    if (!config_path.empty()) {
        config = pipeline_config_from_json_text(
            io::read_text_file(config_path),
            std::filesystem::path(config_path).parent_path());
    }

    // Command-line flags win over config-file values.
    for (const auto& f : inputs) {
        config.posterior_files.emplace_back(f);
    }
    if (!directory.empty()) {
        config.posterior_files = io::list_posterior_files(directory);
    }
    if (!ground_truth.empty()) {
        config.ground_truth = ground_truth;
    }
    if (post_given) {
        config.post = post.settings();
    }
    if (t_collar_given) {
        config.eval.t_collar = t_collar;
    }
    if (offset_ratio_given) {
        config.eval.offset_ratio = offset_ratio;
    }
    if (!buckets_path.empty()) {
        config.eval.buckets = buckets_from_json_text(io::read_text_file(buckets_path));
    }
    if (!out_events.empty()) {
        config.output_events = std::filesystem::path(out_events);
    }
    if (!out_report.empty()) {
        config.output_report = std::filesystem::path(out_report);
    }
    if (jobs_given) {
        config.jobs = jobs;
    }

    const PipelineResult result = run_pipeline(config);
    if (format == "table" || format == "both") {
        std::cout << report_to_table(result.report);
    }
    if (format == "json" || format == "both") {
        std::cout << result.report_json << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weakly supervised sound event detection decoding toolkit"};
    app.require_subcommand(1);

    // pool
    auto* pool_cmd = app.add_subcommand("pool", "Pool frame probabilities per class");
    std::string pool_kind = "ls";
    std::string pool_input;
    std::string pool_output;
    pool_cmd->add_option("--kind", pool_kind, "Pooling function: ls|mean|max")
        ->check(CLI::IsMember({"ls", "mean", "max"}))
        ->capture_default_str();
    pool_cmd->add_option("input", pool_input, "Posterior TSV")->required();
    pool_cmd->add_option("--output", pool_output, "Output TSV (default stdout)");

    // gradcheck
    auto* grad_cmd =
        app.add_subcommand("gradcheck", "Finite-difference check of subsampling gradients");
    std::string grad_kind = "mm";
    int grad_trials = 100;
    std::uint64_t grad_seed = 7;
    double grad_alpha = 0.5;
    double grad_p = 4.0;
    std::size_t grad_kernel = 2;
    grad_cmd->add_option("--kind", grad_kind, "Operator: mm|amm|lp|conv")
        ->check(CLI::IsMember({"mm", "amm", "lp", "conv"}))
        ->capture_default_str();
    grad_cmd->add_option("--trials", grad_trials)->capture_default_str();
    grad_cmd->add_option("--seed", grad_seed)->capture_default_str();
    grad_cmd->add_option("--alpha", grad_alpha, "alpha for amm")->capture_default_str();
    grad_cmd->add_option("--p", grad_p, "exponent for lp")->capture_default_str();
    grad_cmd->add_option("--kernel-size", grad_kernel, "K for conv")->capture_default_str();

    // decode
    auto* decode_cmd =
        app.add_subcommand("decode", "Posterior files -> annotation TSV of events");
    std::vector<std::string> decode_inputs;
    std::string decode_dir;
    std::string decode_output;
    int decode_jobs = 1;
    PostFlags decode_post;
    decode_cmd->add_option("inputs", decode_inputs, "Posterior TSV files");
    decode_cmd->add_option("--in-dir", decode_dir, "Directory of posterior TSV files");
    decode_cmd->add_option("--output", decode_output, "Annotation TSV (default stdout)");
    decode_cmd->add_option("--jobs", decode_jobs, "Worker threads")
        ->envname("SED_DECODE_JOBS")
        ->capture_default_str();
    decode_post.add_to(*decode_cmd);

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "Average several posterior files");
    std::vector<std::string> fuse_inputs;
    std::string fuse_output;
    fuse_cmd->add_option("inputs", fuse_inputs, "Posterior TSV files (>= 2)")
        ->expected(-2);
    fuse_cmd->add_option("--output", fuse_output, "Fused posterior TSV")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Event-based F1 with t-collar matching");
    std::string eval_ref, eval_pred, eval_buckets, eval_classes, eval_json_out;
    std::string eval_format = "both";
    double eval_t_collar = 0.2;
    double eval_offset_ratio = 0.2;
    double eval_clip_split = 0.0;
    eval_cmd->add_option("--ref", eval_ref, "Reference annotation TSV")->required();
    eval_cmd->add_option("--pred", eval_pred, "Predicted annotation TSV")->required();
    eval_cmd->add_option("--t-collar", eval_t_collar)->capture_default_str();
    eval_cmd->add_option("--offset-ratio", eval_offset_ratio)->capture_default_str();
    eval_cmd->add_option("--buckets", eval_buckets,
                         "JSON {\"short\": [...], \"long\": [...]}");
    eval_cmd->add_option("--classes", eval_classes, "JSON array of class labels");
    eval_cmd->add_option("--format", eval_format, "table|json|both")
        ->check(CLI::IsMember({"table", "json", "both"}))
        ->capture_default_str();
    eval_cmd->add_option("--json-out", eval_json_out, "Write the JSON report here");
    auto* clip_split_opt = eval_cmd->add_option(
        "--clip-split-seconds", eval_clip_split,
        "Also report F1 grouped by clip (mean reference event duration threshold)");

    // synth
    auto* synth_cmd =
        app.add_subcommand("synth", "Generate a seeded synthetic corpus");
    std::string synth_spec_path, synth_out_dir;
    int synth_n_clips = 10;
    std::uint64_t synth_seed = 0;
    synth_cmd->add_option("--spec", synth_spec_path, "SynthSpec JSON file");
    synth_cmd->add_option("--out-dir", synth_out_dir, "Output directory")->required();
    synth_cmd->add_option("--n-clips", synth_n_clips)->capture_default_str();
    auto* synth_seed_opt =
        synth_cmd->add_option("--seed", synth_seed, "Override the spec's seed");

    // pipeline
    auto* pipe_cmd = app.add_subcommand(
        "pipeline", "postprocess -> decode -> eval against ground truth");
    std::string pipe_config, pipe_dir, pipe_ref, pipe_buckets, pipe_out_events,
        pipe_out_report;
    std::string pipe_format = "both";
    std::vector<std::string> pipe_inputs;
    double pipe_t_collar = 0.2;
    double pipe_offset_ratio = 0.2;
    int pipe_jobs = 1;
    PostFlags pipe_post;
    pipe_cmd->add_option("--config", pipe_config, "Pipeline JSON config");
    pipe_cmd->add_option("inputs", pipe_inputs, "Posterior TSV files");
    pipe_cmd->add_option("--in-dir", pipe_dir, "Directory of posterior TSV files");
    pipe_cmd->add_option("--ref", pipe_ref, "Ground-truth annotation TSV");
    pipe_post.add_to(*pipe_cmd);
    pipe_cmd->add_option("--t-collar", pipe_t_collar)->capture_default_str();
    pipe_cmd->add_option("--offset-ratio", pipe_offset_ratio)->capture_default_str();
    pipe_cmd->add_option("--buckets", pipe_buckets, "Bucket JSON file");
    pipe_cmd->add_option("--out-events", pipe_out_events, "Write decoded events here");
    pipe_cmd->add_option("--out-report", pipe_out_report, "Write the JSON report here");
    pipe_cmd->add_option("--jobs", pipe_jobs, "Worker threads")
        ->envname("SED_DECODE_JOBS")
        ->capture_default_str();
    pipe_cmd->add_option("--format", pipe_format, "table|json|both")
        ->check(CLI::IsMember({"table", "json", "both"}))
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (pool_cmd->parsed()) {
            return run_pool(pool_kind, pool_input, pool_output);
        }
        if (grad_cmd->parsed()) {
            return run_gradcheck(grad_kind, grad_trials, grad_seed, grad_alpha, grad_p,
                                 grad_kernel);
        }
        if (decode_cmd->parsed()) {
            return run_decode(decode_inputs, decode_dir, decode_post, decode_output,
                              decode_jobs);
        }
        if (fuse_cmd->parsed()) {
            return run_fuse(fuse_inputs, fuse_output);
        }
        if (eval_cmd->parsed()) {
            return run_eval(eval_ref, eval_pred, eval_t_collar, eval_offset_ratio,
                            eval_buckets, eval_classes, eval_format, eval_json_out,
                            clip_split_opt->count() > 0
                                ? std::optional<double>(eval_clip_split)
                                : std::nullopt);
        }
        if (synth_cmd->parsed()) {
            return run_synth(synth_spec_path, synth_out_dir, synth_n_clips,
                             synth_seed_opt->count() > 0
                                 ? std::optional<std::uint64_t>(synth_seed)
                                 : std::nullopt);
        }
        if (pipe_cmd->parsed()) {
            const bool post_given =
                pipe_cmd->count("--post") > 0 || pipe_cmd->count("--phi") > 0 ||
                pipe_cmd->count("--omega") > 0 || pipe_cmd->count("--phi-low") > 0 ||
                pipe_cmd->count("--phi-hi") > 0;
            return run_pipeline_cmd(
                pipe_config, pipe_inputs, pipe_dir, pipe_ref, pipe_post, post_given,
                pipe_t_collar, pipe_cmd->count("--t-collar") > 0, pipe_offset_ratio,
                pipe_cmd->count("--offset-ratio") > 0, pipe_buckets, pipe_out_events,
                pipe_out_report, pipe_jobs,
                pipe_cmd->count("--jobs") > 0 || std::getenv("SED_DECODE_JOBS") != nullptr,
                pipe_format);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
