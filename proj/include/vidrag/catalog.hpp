// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vidrag/transcript.hpp"

namespace vidrag {

struct VideoDocument {
    std::string video_id;
    std::string title;
    std::string description;
    std::string url;
    std::vector<SceneCaption> scenes;  // sorted by span
    std::vector<SubtitleCue> cues;     // sorted by span

    AlignedTranscript transcript() const { return align(scenes, cues, video_id); }

    friend bool operator==(const VideoDocument&, const VideoDocument&) = default;
};

/// Which per-video text is embedded into an index.
enum class FieldVariant { kAsr, kVisualCaptions, kTitle, kTitleDescription, kAlignedTranscript };

inline constexpr FieldVariant kAllFieldVariants[] = {
    FieldVariant::kAsr, FieldVariant::kVisualCaptions, FieldVariant::kTitle,
    FieldVariant::kTitleDescription, FieldVariant::kAlignedTranscript};

/// Wire name, e.g. "ALIGNED_TRANSCRIPT".
std::string_view field_variant_name(FieldVariant variant);
/// Table label, e.g. "Aligned Transcript".
std::string_view field_variant_label(FieldVariant variant);
std::optional<FieldVariant> parse_field_variant(std::string_view name);

/// The text a variant extracts: title; title + "\n" + description; scene
/// texts joined by "\n"; cue texts joined by "\n"; or the rendered aligned
/// transcript.
std::string field_text(const VideoDocument& video, FieldVariant variant);

/// One JSON object per line. Throws Error(kSchemaError, line) or
/// Error(kDuplicateVideoId, line).
std::vector<VideoDocument> parse_catalog(std::string_view raw);
std::vector<VideoDocument> load_catalog(const std::filesystem::path& path);

/// Single-line JSON record accepted by parse_catalog.
std::string catalog_line(const VideoDocument& video);

/// Throws Error(kNotFound) for unknown ids.
const VideoDocument& find_video(const std::vector<VideoDocument>& catalog, std::string_view video_id);

struct FieldStat {
    std::uint64_t total = 0;
    std::uint64_t median = 0;

    friend bool operator==(const FieldStat&, const FieldStat&) = default;
};

/// Character counts are UTF-8 code points. Medians are lower medians.
struct CorpusStats {
    std::uint64_t video_count = 0;
    std::uint64_t scene_count = 0;
    std::uint64_t median_scene_count = 0;
    std::uint64_t total_duration_s = 0;
    std::uint64_t median_duration_s = 0;
    FieldStat title;
    FieldStat description;
    FieldStat title_description;
    FieldStat visual_captions;
    FieldStat subtitles;
    FieldStat aligned_transcript;

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

std::size_t utf8_length(std::string_view text);

/// Whole seconds (floor) of the latest scene or cue end.
std::uint64_t video_duration_s(const VideoDocument& video);

/// Throws Error(kEmptyCatalog).
CorpusStats corpus_stats(const std::vector<VideoDocument>& catalog);

nlohmann::ordered_json stats_to_json(const CorpusStats& stats);

/// Three-column text table in the layout of the dataset statistics table.
std::string render_stats_table(const CorpusStats& stats);

}  // namespace vidrag
