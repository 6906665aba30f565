// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#include "sedkit/io.hpp"

#include <charconv>
#include <cstdio>
#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace sedkit::io {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

double parse_double(const std::string& text, const std::string& what) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw std::runtime_error("malformed " + what + ": '" + text + "'");
    }
    return value;
}

long parse_long(const std::string& text, const std::string& what) {
    long value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw std::runtime_error("malformed " + what + ": '" + text + "'");
    }
    return value;
}

bool parses_back_to(const std::string& text, double v) {
    double parsed = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
    return ec == std::errc() && ptr == text.data() + text.size() && parsed == v;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return line;
}

}  // namespace

std::string format_value(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw std::runtime_error("failed to format value");
    }
    return std::string(buf, ptr);
}

std::string format_seconds(double v) {
    char buf[512];
    for (int precision = 3; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
        std::string text(buf);
        if (parses_back_to(text, v)) {
            return text;
        }
    }
    // Values fixed notation cannot represent exactly (huge magnitudes);
    // annotations never reach this in practice.
    return format_value(v);
}

std::filesystem::path meta_path_for(const std::filesystem::path& posterior_path) {
    std::filesystem::path meta = posterior_path;
    meta.replace_extension();
    meta += ".meta.json";
    return meta;
}

std::vector<std::filesystem::path> list_posterior_files(
    const std::filesystem::path& directory) {
    std::vector<std::filesystem::path> found;
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        if (entry.path().extension() == ".tsv" &&
            std::filesystem::exists(meta_path_for(entry.path()))) {
            found.push_back(entry.path());
        }
    }
    std::sort(found.begin(), found.end());
    return found;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("failed writing file: " + path.string());
    }
}

PosteriorClip read_posterior(const std::filesystem::path& tsv_path) {
    std::ifstream in(tsv_path);
    if (!in) {
        throw std::runtime_error("cannot open posterior file: " + tsv_path.string());
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty posterior file: " + tsv_path.string());
    }
    auto header = split_tabs(strip_cr(line));
    if (header.size() < 2 || header[0] != "frame") {
        throw std::runtime_error("posterior header must start with 'frame': " +
                                 tsv_path.string());
    }
    ClassMap classes(std::vector<std::string>(header.begin() + 1, header.end()));

    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) {
            continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() != header.size()) {
            throw std::runtime_error("posterior row has wrong field count: " +
                                     tsv_path.string());
        }
        const long frame = parse_long(fields[0], "frame index");
        if (frame != static_cast<long>(rows)) {
            throw std::runtime_error("non-contiguous frame index in " + tsv_path.string());
        }
        for (std::size_t c = 1; c < fields.size(); ++c) {
            values.push_back(parse_double(fields[c], "probability"));
        }
        ++rows;
    }

    const auto meta_path = meta_path_for(tsv_path);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_text_file(meta_path));
    } catch (const std::exception& e) {
        throw std::runtime_error("cannot read posterior sidecar " + meta_path.string() +
                                 ": " + e.what());
    }

    PosteriorClip clip;
    clip.clip_id = meta.at("clip_id").get<std::string>();
    clip.grid.base_hop = meta.at("base_hop_seconds").get<double>();
    clip.grid.factor = meta.at("factor").get<int>();
    clip.classes = std::move(classes);
    clip.probs = Matrix(rows, clip.classes.size());
    for (std::size_t t = 0; t < rows; ++t) {
        for (std::size_t c = 0; c < clip.classes.size(); ++c) {
            clip.probs(t, c) = values[t * clip.classes.size() + c];
        }
    }

    if (auto error = validate_clip(clip)) {
        throw std::runtime_error("invalid posterior clip " + tsv_path.string() + ": " +
                                 *error);
    }
    return clip;
}

void write_posterior(const PosteriorClip& clip, const std::filesystem::path& tsv_path) {
    if (auto error = validate_clip(clip)) {
        throw std::invalid_argument("refusing to write invalid clip: " + *error);
    }

    std::ostringstream out;
    out << "frame";
    for (const auto& label : clip.classes.labels()) {
        out << '\t' << label;
    }
    out << '\n';
    for (std::size_t t = 0; t < clip.probs.rows(); ++t) {
        out << t;
        for (std::size_t c = 0; c < clip.probs.cols(); ++c) {
            out << '\t' << format_value(clip.probs(t, c));
        }
        out << '\n';
    }
    write_text_file(tsv_path, out.str());

    nlohmann::json meta;
    meta["clip_id"] = clip.clip_id;
    meta["base_hop_seconds"] = clip.grid.base_hop;
    meta["factor"] = clip.grid.factor;
    write_text_file(meta_path_for(tsv_path), meta.dump(2) + "\n");
}

EventCorpus read_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open annotation file: " + path.string());
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty annotation file: " + path.string());
    }
    const auto header = split_tabs(strip_cr(line));
    if (header.size() != 4 || header[0] != "filename" || header[1] != "onset" ||
        header[2] != "offset" || header[3] != "event_label") {
        throw std::runtime_error("bad annotation header in " + path.string());
    }

    std::map<std::string, std::vector<Event>> grouped;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) {
            continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() != 4) {
            throw std::runtime_error("annotation row has wrong field count: " +
                                     path.string());
        }
        Event event;
        event.label = fields[3];
        event.onset = parse_double(fields[1], "onset");
        event.offset = parse_double(fields[2], "offset");
        validate(event);
        grouped[fields[0]].push_back(std::move(event));
    }

    EventCorpus corpus;
    for (auto& [clip_id, events] : grouped) {
        corpus.emplace(clip_id, EventList(clip_id, std::move(events)));
    }
    return corpus;
}

void write_annotations(const EventCorpus& corpus, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "filename\tonset\toffset\tevent_label\n";
    for (const auto& [clip_id, list] : corpus) {
        for (const Event& e : list.events()) {
            out << clip_id << '\t' << format_seconds(e.onset) << '\t'
                << format_seconds(e.offset) << '\t' << e.label << '\n';
        }
    }
    write_text_file(path, out.str());
}

}  // namespace sedkit::io
