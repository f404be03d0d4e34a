// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

// Aligned video caption transcripts: the time-ordered interleaving of visual
// scene captions and speech cues for one video, its canonical one-line-per-
// segment rendering, and line-packed chunking for retrieval.

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vidrag {

/// Half-open-agnostic millisecond interval; both ends are stored as given.
struct TimeSpan {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;

    /// Throws Error(kInvalidParams) unless 0 <= start_ms <= end_ms.
    static TimeSpan checked(std::int64_t start_ms, std::int64_t end_ms);

    bool valid() const noexcept { return start_ms >= 0 && end_ms >= start_ms; }
    bool contains(const TimeSpan& inner) const noexcept {
        return inner.start_ms >= start_ms && inner.end_ms <= end_ms;
    }

    friend auto operator<=>(const TimeSpan&, const TimeSpan&) = default;
};

struct SceneCaption {
    TimeSpan span;
    std::string text;

    friend bool operator==(const SceneCaption&, const SceneCaption&) = default;
};

struct SubtitleCue {
    TimeSpan span;
    std::string text;

    friend bool operator==(const SubtitleCue&, const SubtitleCue&) = default;
};

/// VISUAL sorts before SPEECH at equal start time.
enum class SegmentKind : std::uint8_t { kVisual = 0, kSpeech = 1 };

std::string_view segment_kind_name(SegmentKind kind);

struct AlignedSegment {
    TimeSpan span;
    SegmentKind kind = SegmentKind::kVisual;
    std::string text;

    friend bool operator==(const AlignedSegment&, const AlignedSegment&) = default;
};

struct AlignedTranscript {
    std::string video_id;
    std::vector<AlignedSegment> segments;

    friend bool operator==(const AlignedTranscript&, const AlignedTranscript&) = default;
};

/// Replaces every run of CR/LF with one space and trims surrounding
/// whitespace, so one caption is always one rendered line.
std::string normalize_caption_text(std::string_view text);

/// `HH:MM:SS.mmm`, hours zero-padded to at least two digits.
std::string format_timestamp(std::int64_t ms);

/// Inverse of format_timestamp. Returns -1 if `text` does not match the grammar.
std::int64_t parse_timestamp(std::string_view text);

/// Merges scenes and cues ordered by (start, VISUAL before SPEECH, end, input
/// order). Texts are copied unchanged.
AlignedTranscript align(const std::vector<SceneCaption>& scenes,
                        const std::vector<SubtitleCue>& cues,
                        std::string video_id = {});

/// `[HH:MM:SS.mmm --> HH:MM:SS.mmm] KIND: text`, one line per segment,
/// joined with '\n', no trailing newline.
std::string render_line(const AlignedSegment& segment);
std::string render(const AlignedTranscript& transcript);

/// Parses canonical rendered text. Throws Error(kMalformedLine, line number).
AlignedTranscript parse_rendered(std::string_view text, std::string video_id = {});

struct ChunkParams {
    std::size_t max_chars = 2000;  // code points
    std::size_t overlap_lines = 2;

    friend bool operator==(const ChunkParams&, const ChunkParams&) = default;
};

/// A contiguous run of rendered lines.
struct Chunk {
    std::string video_id;
    std::size_t chunk_index = 0;
    std::size_t char_begin = 0;  // code point offsets into render(transcript)
    std::size_t char_end = 0;
    std::size_t line_begin = 0;  // segment indices, half-open
    std::size_t line_end = 0;
    TimeSpan time_span;
    std::string text;

    friend bool operator==(const Chunk&, const Chunk&) = default;
};

/// Greedy line packing: each chunk takes as many whole lines as fit in
/// `max_chars` (at least one), and the next chunk starts `overlap_lines`
/// lines before the previous end, pulled forward when needed to progress.
/// Throws Error(kInvalidParams) if max_chars == 0.
std::vector<Chunk> chunk(const AlignedTranscript& transcript, const ChunkParams& params);

}  // namespace vidrag
