// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "vidrag/transcript.hpp"

namespace vidrag {

enum class SubtitleFormat { kSrt, kWebVtt };

/// WebVTT if the text (after an optional BOM) begins with "WEBVTT", else SRT.
SubtitleFormat detect_subtitle_format(std::string_view raw);

/// Parses one SRT (`HH:MM:SS,mmm`) or WebVTT (`[HH:]MM:SS.mmm`) timestamp;
/// either decimal separator is accepted. Returns -1 on failure.
std::int64_t parse_cue_timestamp(std::string_view text);

/// Cues come back sorted by (start, end) with payload lines joined by one
/// space and markup (`<i>`, `<v Name>`, `{\an8}`, entities) removed.
/// Throws Error(kMalformedTimestamp, line) or Error(kEmptyInput).
std::vector<SubtitleCue> parse_subtitles(std::string_view raw, SubtitleFormat format);
std::vector<SubtitleCue> parse_subtitles(std::string_view raw);

}  // namespace vidrag
