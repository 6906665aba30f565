// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <unistd.h>

#include <json.hpp>

#include "sedkit/io.hpp"

using namespace sedkit;

namespace {

std::filesystem::path temp_dir() {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("sedkit_cli_test_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

int run(const std::string& args, const std::filesystem::path& stdout_file = {}) {
    std::string command = std::string(SEDKIT_BIN) + " " + args;
    if (!stdout_file.empty()) {
        command += " > " + stdout_file.string();
    }
    command += " 2> /dev/null";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSynthSpec = R"({
    "seed": 99,
    "clip_length_seconds": 10.0,
    "classes": ["Dog", "Blender"],
    "durations": {"Dog": [0.2, 1.0], "Blender": [3.0, 6.0]},
    "events_per_class": [1, 2],
    "event_level": 1.0,
    "floor_level": 0.0
})";

}  // namespace

TEST_CASE("synth -> decode -> eval round trip through the CLI") {
    const auto dir = temp_dir();
    io::write_text_file(dir / "spec.json", kSynthSpec);

    REQUIRE(run("synth --spec " + (dir / "spec.json").string() + " --out-dir " +
                (dir / "corpus").string() + " --n-clips 5") == 0);
    CHECK(std::filesystem::exists(dir / "corpus" / "synth_0000.tsv"));
    CHECK(std::filesystem::exists(dir / "corpus" / "synth_0000.meta.json"));
    CHECK(std::filesystem::exists(dir / "corpus" / "ground_truth.tsv"));

    REQUIRE(run("decode --in-dir " + (dir / "corpus").string() +
                " --post double --phi-low 0.2 --phi-hi 0.75 --output " +
                (dir / "pred.tsv").string()) == 0);

    REQUIRE(run("eval --ref " + (dir / "corpus" / "ground_truth.tsv").string() +
                " --pred " + (dir / "pred.tsv").string() + " --format json --json-out " +
                (dir / "report.json").string()) == 0);
    const auto report = nlohmann::json::parse(io::read_text_file(dir / "report.json"));
    CHECK(report.at("macro_f1").get<double>() == doctest::Approx(1.0));
    CHECK(report.at("classes").contains("Dog"));

    // The pipeline subcommand reproduces the same numbers in one step.
    REQUIRE(run("pipeline --in-dir " + (dir / "corpus").string() + " --ref " +
                (dir / "corpus" / "ground_truth.tsv").string() +
                " --post double --format json --out-events " +
                (dir / "pipeline_pred.tsv").string() + " --out-report " +
                (dir / "pipeline_report.json").string(),
                dir / "pipeline_stdout.json") == 0);
    const auto pipeline_report =
        nlohmann::json::parse(io::read_text_file(dir / "pipeline_report.json"));
    CHECK(pipeline_report.at("macro_f1") == report.at("macro_f1"));

    // Re-scoring the pipeline's decoded TSV reproduces its embedded report.
    REQUIRE(run("eval --ref " + (dir / "corpus" / "ground_truth.tsv").string() +
                " --pred " + (dir / "pipeline_pred.tsv").string() +
                " --format json --json-out " + (dir / "rescored.json").string()) == 0);
    CHECK(nlohmann::json::parse(io::read_text_file(dir / "rescored.json")) ==
          pipeline_report);
    std::filesystem::remove_all(dir);
}

TEST_CASE("gradcheck subcommand emits a passing JSON report") {
    const auto dir = temp_dir();
    for (const std::string kind : {"mm", "amm", "lp", "conv"}) {
        const auto out = dir / (kind + ".json");
        REQUIRE(run("gradcheck --kind " + kind + " --trials 50 --seed 7", out) == 0);
        const auto report = nlohmann::json::parse(io::read_text_file(out));
        CHECK(report.at("kind").is_string());
        CHECK(report.at("trials").get<int>() == 50);
        CHECK(report.at("pass").get<bool>());
        CHECK(report.at("max_relative_error").get<double>() < 1e-4);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("pool subcommand emits one probability per class") {
    const auto dir = temp_dir();
    PosteriorClip clip;
    clip.clip_id = "clip";
    clip.classes = ClassMap({"Dog", "Cat"});
    clip.grid = TimeGrid{0.020, 1};
    clip.probs = Matrix(3, 2);
    for (std::size_t t = 0; t < 3; ++t) {
        clip.probs(t, 0) = 0.7;
        clip.probs(t, 1) = 0.2;
    }
    io::write_posterior(clip, dir / "clip.tsv");

    const auto out = dir / "pooled.tsv";
    REQUIRE(run("pool --kind ls " + (dir / "clip.tsv").string(), out) == 0);
    const std::string text = io::read_text_file(out);
    CHECK(text.find("label\tprobability") == 0);
    CHECK(text.find("Dog\t0.7") != std::string::npos);
    CHECK(text.find("Cat\t0.2") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("fuse subcommand averages posterior files") {
    const auto dir = temp_dir();
    PosteriorClip clip;
    clip.clip_id = "clip";
    clip.classes = ClassMap({"Dog"});
    clip.grid = TimeGrid{0.020, 1};
    clip.probs = Matrix(4, 1, 0.2);
    io::write_posterior(clip, dir / "a.tsv");
    clip.probs = Matrix(4, 1, 0.6);
    io::write_posterior(clip, dir / "b.tsv");

    REQUIRE(run("fuse " + (dir / "a.tsv").string() + " " + (dir / "b.tsv").string() +
                " --output " + (dir / "fused.tsv").string()) == 0);
    const PosteriorClip fused = io::read_posterior(dir / "fused.tsv");
    CHECK(fused.probs(0, 0) == doctest::Approx(0.4));
    CHECK(fused.clip_id == "clip");
    std::filesystem::remove_all(dir);
}

TEST_CASE("CLI failures exit nonzero with a diagnostic") {
    const auto dir = temp_dir();
    CHECK(run("decode missing.tsv --output " + (dir / "x.tsv").string()) != 0);
    CHECK(run("eval --ref missing.tsv --pred missing.tsv") != 0);
    CHECK(run("pipeline --in-dir " + dir.string() + " --ref missing.tsv") != 0);

    // phi_low > phi_hi is rejected before any file is touched.
    io::write_text_file(dir / "bad_config.json", R"({
        "posteriors": ["nonexistent.tsv"],
        "ground_truth": "nonexistent_ref.tsv",
        "post": {"method": "double", "phi_low": 0.9, "phi_hi": 0.2}
    })");
    CHECK(run("pipeline --config " + (dir / "bad_config.json").string()) != 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("SED_DECODE_JOBS environment variable is honored") {
    const auto dir = temp_dir();
    io::write_text_file(dir / "spec.json", kSynthSpec);
    REQUIRE(run("synth --spec " + (dir / "spec.json").string() + " --out-dir " +
                (dir / "corpus").string() + " --n-clips 3") == 0);

    const std::string command =
        "SED_DECODE_JOBS=4 " + std::string(SEDKIT_BIN) + " decode --in-dir " +
        (dir / "corpus").string() + " --output " + (dir / "pred.tsv").string() +
        " 2> /dev/null";
    REQUIRE(std::system(command.c_str()) == 0);
    CHECK(std::filesystem::exists(dir / "pred.tsv"));
    std::filesystem::remove_all(dir);
}
