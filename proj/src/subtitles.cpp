// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/subtitles.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <utility>

#include "vidrag/error.hpp"

namespace vidrag {

namespace {

struct Line {
    std::size_t number;
    std::string_view text;
};

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::string_view strip_bom(std::string_view raw) {
    if (raw.starts_with("\xEF\xBB\xBF")) raw.remove_prefix(3);
    return raw;
}

bool parse_digits(std::string_view s, std::int64_t& out) {
    if (s.empty() || s.size() > 12) return false;
    std::int64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

constexpr std::array<std::pair<std::string_view, std::string_view>, 8> kEntities{{
    {"&amp;", "&"},
    {"&lt;", "<"},
    {"&gt;", ">"},
    {"&nbsp;", " "},
    {"&quot;", "\""},
    {"&#39;", "'"},
    {"&lrm;", ""},
    {"&rlm;", ""},
}};

// Drops <tags>, {\override} blocks and decodes the common entities.
std::string strip_markup(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    for (std::size_t i = 0; i < in.size();) {
        const char c = in[i];
        if (c == '<') {
            const auto close = in.find('>', i + 1);
            if (close != std::string_view::npos) {
                i = close + 1;
                continue;
            }
        } else if (c == '{' && i + 1 < in.size() && in[i + 1] == '\\') {
            const auto close = in.find('}', i + 2);
            if (close != std::string_view::npos) {
                i = close + 1;
                continue;
            }
        } else if (c == '&') {
            bool matched = false;
            for (const auto& [entity, replacement] : kEntities) {
                if (in.substr(i).starts_with(entity)) {
                    out += replacement;
                    i += entity.size();
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

bool skip_block(std::string_view first, SubtitleFormat format) {
    if (format != SubtitleFormat::kWebVtt) return false;
    return first.starts_with("WEBVTT") || first.starts_with("NOTE") || first.starts_with("STYLE") ||
           first.starts_with("REGION");
}

}  // namespace

SubtitleFormat detect_subtitle_format(std::string_view raw) {
    return strip_bom(raw).starts_with("WEBVTT") ? SubtitleFormat::kWebVtt : SubtitleFormat::kSrt;
}

std::int64_t parse_cue_timestamp(std::string_view text) {
    text = trim(text);
    const auto sep = text.find_last_of(",.");
    std::string_view whole = text;
    std::int64_t millis = 0;
    if (sep != std::string_view::npos) {
        const auto frac = text.substr(sep + 1);
        if (frac.empty() || frac.size() > 3 || !parse_digits(frac, millis)) return -1;
        for (std::size_t k = frac.size(); k < 3; ++k) millis *= 10;
        whole = text.substr(0, sep);
    }
    std::array<std::int64_t, 3> parts{};
    std::size_t count = 0;
    while (true) {
        if (count == parts.size()) return -1;
        const auto colon = whole.find(':');
        if (!parse_digits(whole.substr(0, colon), parts[count++])) return -1;
        if (colon == std::string_view::npos) break;
        whole.remove_prefix(colon + 1);
    }
    std::int64_t h = 0, m = 0, s = 0;
    if (count == 3) {
        h = parts[0];
        m = parts[1];
        s = parts[2];
        if (m >= 60) return -1;
    } else if (count == 2) {
        m = parts[0];
        s = parts[1];
    } else {
        return -1;
    }
    if (s >= 60) return -1;
    return ((h * 60 + m) * 60 + s) * 1000 + millis;
}

std::vector<SubtitleCue> parse_subtitles(std::string_view raw, SubtitleFormat format) {
    raw = strip_bom(raw);

    std::vector<Line> lines;
    std::size_t pos = 0;
    std::size_t number = 0;
    while (pos < raw.size()) {
        auto nl = raw.find('\n', pos);
        if (nl == std::string_view::npos) nl = raw.size();
        auto text = raw.substr(pos, nl - pos);
        if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
        lines.push_back({++number, text});
        pos = nl + 1;
    }

    std::vector<SubtitleCue> cues;
    std::size_t i = 0;
    while (i < lines.size()) {
        while (i < lines.size() && trim(lines[i].text).empty()) ++i;
        const std::size_t block_begin = i;
        while (i < lines.size() && !trim(lines[i].text).empty()) ++i;
        const std::size_t block_end = i;
        if (block_begin == block_end) continue;
        if (skip_block(trim(lines[block_begin].text), format)) continue;

        std::size_t timing = block_begin;
        while (timing < block_end && lines[timing].text.find("-->") == std::string_view::npos) ++timing;
        if (timing == block_end) continue;

        const Line& tl = lines[timing];
        const auto arrow = tl.text.find("-->");
        auto right = trim(tl.text.substr(arrow + 3));
        right = right.substr(0, right.find_first_of(" \t"));
        const auto start = parse_cue_timestamp(tl.text.substr(0, arrow));
        const auto end = parse_cue_timestamp(right);
        if (start < 0 || end < 0 || end < start) {
            throw Error(ErrorCode::kMalformedTimestamp,
                        "line " + std::to_string(tl.number) + ": '" + std::string(tl.text) + "'",
                        tl.number);
        }

        std::string payload;
        for (std::size_t k = timing + 1; k < block_end; ++k) {
            const auto clean = strip_markup(lines[k].text);
            const auto piece = trim(clean);
            if (piece.empty()) continue;
            if (!payload.empty()) payload += ' ';
            payload += piece;
        }
        payload = normalize_caption_text(payload);
        if (payload.empty()) continue;
        cues.push_back({TimeSpan{start, end}, std::move(payload)});
    }

    if (cues.empty()) throw Error(ErrorCode::kEmptyInput, "no subtitle cues found");
    std::stable_sort(cues.begin(), cues.end(), [](const SubtitleCue& a, const SubtitleCue& b) {
        return a.span < b.span;
    });
    return cues;
}

std::vector<SubtitleCue> parse_subtitles(std::string_view raw) {
    return parse_subtitles(raw, detect_subtitle_format(raw));
}

}  // namespace vidrag
