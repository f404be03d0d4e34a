// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/transcript.hpp"

#include <algorithm>
#include <cstdio>
#include <tuple>

#include "vidrag/error.hpp"

namespace vidrag {

namespace {

std::size_t code_points(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
}

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::int64_t to_int(std::string_view s) {
    std::int64_t v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

constexpr std::string_view kArrow = " --> ";

}  // namespace

TimeSpan TimeSpan::checked(std::int64_t start_ms, std::int64_t end_ms) {
    TimeSpan span{start_ms, end_ms};
    if (!span.valid()) {
        throw Error(ErrorCode::kInvalidParams,
                    "invalid time span " + std::to_string(start_ms) + ".." + std::to_string(end_ms));
    }
    return span;
}

std::string_view segment_kind_name(SegmentKind kind) {
    return kind == SegmentKind::kVisual ? "VISUAL" : "SPEECH";
}

std::string normalize_caption_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_break = false;
    for (char c : text) {
        if (c == '\n' || c == '\r') {
            in_break = true;
            continue;
        }
        if (in_break) {
            out.push_back(' ');
            in_break = false;
        }
        out.push_back(c);
    }
    auto first = std::find_if_not(out.begin(), out.end(), is_space);
    auto last = std::find_if_not(out.rbegin(), out.rend(), is_space).base();
    if (first >= last) return {};
    return std::string(first, last);
}

std::string format_timestamp(std::int64_t ms) {
    if (ms < 0) ms = 0;
    const std::int64_t millis = ms % 1000;
    const std::int64_t total_s = ms / 1000;
    const std::int64_t secs = total_s % 60;
    const std::int64_t mins = (total_s / 60) % 60;
    const std::int64_t hours = total_s / 3600;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld.%03lld", static_cast<long long>(hours),
                  static_cast<long long>(mins), static_cast<long long>(secs),
                  static_cast<long long>(millis));
    return buf;
}

std::int64_t parse_timestamp(std::string_view text) {
    // HH+:MM:SS.mmm
    const auto dot = text.rfind('.');
    if (dot == std::string_view::npos || text.size() - dot - 1 != 3) return -1;
    const auto c2 = text.rfind(':', dot);
    if (c2 == std::string_view::npos || c2 == 0) return -1;
    const auto c1 = text.rfind(':', c2 - 1);
    if (c1 == std::string_view::npos) return -1;
    const auto hh = text.substr(0, c1);
    const auto mm = text.substr(c1 + 1, c2 - c1 - 1);
    const auto ss = text.substr(c2 + 1, dot - c2 - 1);
    const auto fff = text.substr(dot + 1);
    if (hh.size() < 2 || hh.size() > 12 || !all_digits(hh) || mm.size() != 2 || !all_digits(mm) ||
        ss.size() != 2 || !all_digits(ss) || !all_digits(fff)) {
        return -1;
    }
    const auto m = to_int(mm);
    const auto s = to_int(ss);
    if (m >= 60 || s >= 60) return -1;
    return ((to_int(hh) * 60 + m) * 60 + s) * 1000 + to_int(fff);
}

AlignedTranscript align(const std::vector<SceneCaption>& scenes,
                        const std::vector<SubtitleCue>& cues, std::string video_id) {
    AlignedTranscript out;
    out.video_id = std::move(video_id);
    out.segments.reserve(scenes.size() + cues.size());
    for (const auto& s : scenes) out.segments.push_back({s.span, SegmentKind::kVisual, s.text});
    for (const auto& c : cues) out.segments.push_back({c.span, SegmentKind::kSpeech, c.text});
    // Stable sort keeps input order as the final tie-breaker within a kind.
    std::stable_sort(out.segments.begin(), out.segments.end(),
                     [](const AlignedSegment& a, const AlignedSegment& b) {
                         return std::tie(a.span.start_ms, a.kind, a.span.end_ms) <
                                std::tie(b.span.start_ms, b.kind, b.span.end_ms);
                     });
    return out;
}

std::string render_line(const AlignedSegment& segment) {
    std::string line;
    line.reserve(segment.text.size() + 48);
    line += '[';
    line += format_timestamp(segment.span.start_ms);
    line += kArrow;
    line += format_timestamp(segment.span.end_ms);
    line += "] ";
    line += segment_kind_name(segment.kind);
    line += ": ";
    line += segment.text;
    return line;
}

std::string render(const AlignedTranscript& transcript) {
    std::string out;
    for (std::size_t i = 0; i < transcript.segments.size(); ++i) {
        if (i > 0) out += '\n';
        out += render_line(transcript.segments[i]);
    }
    return out;
}

AlignedTranscript parse_rendered(std::string_view text, std::string video_id) {
    AlignedTranscript out;
    out.video_id = std::move(video_id);
    if (text.empty()) return out;
    if (text.back() == '\n') text.remove_suffix(1);

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        ++line_no;
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;

        const auto fail = [&] {
            return Error(ErrorCode::kMalformedLine, "line " + std::to_string(line_no), line_no);
        };
        if (line.empty() || line.front() != '[') throw fail();
        const auto arrow = line.find(kArrow);
        if (arrow == std::string_view::npos) throw fail();
        const auto close = line.find("] ", arrow + kArrow.size());
        if (close == std::string_view::npos) throw fail();
        const auto start = parse_timestamp(line.substr(1, arrow - 1));
        const auto end = parse_timestamp(line.substr(arrow + kArrow.size(), close - arrow - kArrow.size()));
        if (start < 0 || end < 0 || end < start) throw fail();

        std::string_view rest = line.substr(close + 2);
        SegmentKind kind;
        if (rest.starts_with("VISUAL: ")) {
            kind = SegmentKind::kVisual;
        } else if (rest.starts_with("SPEECH: ")) {
            kind = SegmentKind::kSpeech;
        } else {
            throw fail();
        }
        rest.remove_prefix(8);
        out.segments.push_back({TimeSpan{start, end}, kind, std::string(rest)});
    }
    return out;
}

std::vector<Chunk> chunk(const AlignedTranscript& transcript, const ChunkParams& params) {
    if (params.max_chars == 0) {
        throw Error(ErrorCode::kInvalidParams, "max_chars must be positive");
    }
    const auto& segs = transcript.segments;
    const std::size_t n = segs.size();
    // Sizes and offsets count code points, not bytes.
    std::vector<std::string> lines;
    std::vector<std::size_t> widths;
    std::vector<std::size_t> offsets;
    lines.reserve(n);
    widths.reserve(n);
    offsets.reserve(n);
    std::size_t offset = 0;
    for (const auto& seg : segs) {
        offsets.push_back(offset);
        lines.push_back(render_line(seg));
        widths.push_back(code_points(lines.back()));
        offset += widths.back() + 1;
    }

    std::vector<Chunk> chunks;
    std::size_t begin = 0;
    while (begin < n) {
        std::size_t end = begin + 1;
        std::size_t length = widths[begin];
        while (end < n && length + 1 + widths[end] <= params.max_chars) {
            length += 1 + widths[end];
            ++end;
        }

        Chunk c;
        c.video_id = transcript.video_id;
        c.chunk_index = chunks.size();
        c.line_begin = begin;
        c.line_end = end;
        c.char_begin = offsets[begin];
        c.char_end = offsets[begin] + length;
        c.time_span = segs[begin].span;
        for (std::size_t i = begin; i < end; ++i) {
            if (i > begin) c.text += '\n';
            c.text += lines[i];
            c.time_span.start_ms = std::min(c.time_span.start_ms, segs[i].span.start_ms);
            c.time_span.end_ms = std::max(c.time_span.end_ms, segs[i].span.end_ms);
        }
        chunks.push_back(std::move(c));

        if (end == n) break;
        const std::size_t back = std::min(params.overlap_lines, end - begin);
        begin = std::max(end - back, begin + 1);
    }
    return chunks;
}

}  // namespace vidrag
