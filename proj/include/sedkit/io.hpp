// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "sedkit/core.hpp"

namespace sedkit::io {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_value(double v);

/// Fixed-point seconds with at least 3 decimal places; precision is widened
/// until the string parses back to exactly the same double.
std::string format_seconds(double v);

/// Sidecar metadata path for a posterior file: same stem, ".meta.json".
std::filesystem::path meta_path_for(const std::filesystem::path& posterior_path);

/// All .tsv files in the directory that carry a posterior sidecar, sorted.
/// Annotation TSVs (no sidecar) are skipped.
std::vector<std::filesystem::path> list_posterior_files(
    const std::filesystem::path& directory);

/// Reads a posterior TSV (header "frame<TAB>label..." then one row per
/// frame) together with its sidecar {clip_id, base_hop_seconds, factor}.
/// The result is validated; invalid clips throw.
PosteriorClip read_posterior(const std::filesystem::path& tsv_path);

/// Writes the TSV and its sidecar next to it.
void write_posterior(const PosteriorClip& clip, const std::filesystem::path& tsv_path);

/// DCASE-style annotation TSV: header "filename onset offset event_label",
/// tab separated. Clips group by filename; each group becomes an EventList.
EventCorpus read_annotations(const std::filesystem::path& path);

/// Rows are written sorted by (clip_id, onset, label); clips with no events
/// produce no rows.
void write_annotations(const EventCorpus& corpus, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace sedkit::io
