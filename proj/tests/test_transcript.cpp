// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "vidrag/error.hpp"
#include "vidrag/transcript.hpp"

using namespace vidrag;

namespace {

std::vector<std::string> texts_of(const std::vector<AlignedSegment>& segs) {
    std::vector<std::string> out;
    for (const auto& s : segs) out.push_back(s.text);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST(Timestamp, FormatsAndParses) {
    EXPECT_EQ(format_timestamp(0), "00:00:00.000");
    EXPECT_EQ(format_timestamp(83'000), "00:01:23.000");
    EXPECT_EQ(format_timestamp(3'723'004), "01:02:03.004");
    EXPECT_EQ(parse_timestamp("01:02:03.004"), 3'723'004);
    EXPECT_EQ(parse_timestamp("1:02:03.004"), -1);
    EXPECT_EQ(parse_timestamp("01:60:03.004"), -1);
    EXPECT_EQ(parse_timestamp("01:02:03,004"), -1);
    for (std::int64_t ms : {0LL, 1LL, 999LL, 59'999LL, 86'399'999LL, 360'000'000LL}) {
        EXPECT_EQ(parse_timestamp(format_timestamp(ms)), ms) << ms;
    }
}

TEST(Align, VisualBeforeSpeechAtEqualStart) {
    const std::vector<SceneCaption> scenes{{{1000, 5000}, "a chef at a counter"}};
    const std::vector<SubtitleCue> cues{{{1000, 2000}, "hello"}, {{0, 900}, "intro"}};
    const auto t = align(scenes, cues, "v");
    ASSERT_EQ(t.segments.size(), 3u);
    EXPECT_EQ(t.segments[0].text, "intro");
    EXPECT_EQ(t.segments[1].kind, SegmentKind::kVisual);
    EXPECT_EQ(t.segments[2].kind, SegmentKind::kSpeech);
    EXPECT_EQ(render(t),
              "[00:00:00.000 --> 00:00:00.900] SPEECH: intro\n"
              "[00:00:01.000 --> 00:00:05.000] VISUAL: a chef at a counter\n"
              "[00:00:01.000 --> 00:00:02.000] SPEECH: hello");
}

TEST(Align, EmptyInputsGiveEmptyTranscript) {
    EXPECT_TRUE(align({}, {}, "v").segments.empty());
    EXPECT_EQ(render(align({}, {}, "v")), "");
}

TEST(Align, MatchesTaggedSortOracleAndKeepsTexts) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
        const auto scenes = oracle::random_items<SceneCaption>(rng, 40, 60'000);
        const auto cues = oracle::random_items<SubtitleCue>(rng, 40, 60'000);
        const auto got = align(scenes, cues, "v");
        const auto want = oracle::align(scenes, cues);
        ASSERT_EQ(got.segments, want) << "instance " << i;
        std::vector<std::string> in;
        for (const auto& s : scenes) in.push_back(s.text);
        for (const auto& c : cues) in.push_back(c.text);
        std::sort(in.begin(), in.end());
        EXPECT_EQ(texts_of(got.segments), in);
    }
}

TEST(Render, RoundTripsRandomTranscripts) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 300; ++i) {
        const auto t = oracle::random_transcript(rng);
        const auto text = render(t);
        EXPECT_EQ(parse_rendered(text, "vid"), t);
        EXPECT_EQ(parse_rendered(text + "\n", "vid"), t);
    }
}

TEST(Render, ParseRejectsMalformedLineWithLineNumber) {
    const std::string text =
        "[00:00:00.000 --> 00:00:01.000] VISUAL: ok\n"
        "[00:00:01.000 -> 00:00:02.000] SPEECH: broken arrow";
    try {
        parse_rendered(text);
        FAIL() << "expected MalformedLine";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kMalformedLine);
        EXPECT_EQ(e.location(), std::optional<std::size_t>(2));
    }
    EXPECT_THROW(parse_rendered("[00:00:00.000 --> 00:00:01.000] AUDIO: x"), Error);
    EXPECT_THROW(parse_rendered("[00:00:02.000 --> 00:00:01.000] VISUAL: backwards"), Error);
}

TEST(Chunk, MatchesGreedyPackingSimulation) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> max_chars(1, 700);
    std::uniform_int_distribution<std::size_t> overlap(0, 4);
    for (int i = 0; i < 300; ++i) {
        const auto t = oracle::random_transcript(rng);
        const ChunkParams params{max_chars(rng), overlap(rng)};
        const auto chunks = chunk(t, params);
        std::vector<std::size_t> widths;
        for (const auto& seg : t.segments) widths.push_back(oracle::code_points(render_line(seg)));
        const auto shapes = oracle::chunk_shapes(widths, params.max_chars, params.overlap_lines);
        ASSERT_EQ(chunks.size(), shapes.size());

        const auto full = render(t);
        for (std::size_t c = 0; c < chunks.size(); ++c) {
            const auto& ch = chunks[c];
            EXPECT_EQ(ch.chunk_index, c);
            EXPECT_EQ(ch.line_begin, shapes[c].line_begin);
            EXPECT_EQ(ch.line_end, shapes[c].line_end);
            std::string joined;
            TimeSpan span = t.segments[ch.line_begin].span;
            for (auto l = ch.line_begin; l < ch.line_end; ++l) {
                if (l > ch.line_begin) joined += '\n';
                joined += render_line(t.segments[l]);
                span.start_ms = std::min(span.start_ms, t.segments[l].span.start_ms);
                span.end_ms = std::max(span.end_ms, t.segments[l].span.end_ms);
            }
            EXPECT_EQ(ch.text, joined);
            EXPECT_EQ(ch.time_span, span);
            EXPECT_EQ(ch.char_end - ch.char_begin, oracle::code_points(joined));
            // Offsets index the full render in code points.
            std::size_t cp = 0, byte = 0;
            while (cp < ch.char_begin) cp += (static_cast<unsigned char>(full[++byte]) & 0xC0) != 0x80;
            EXPECT_EQ(full.compare(byte, ch.text.size(), ch.text), 0);
            if (ch.line_end - ch.line_begin > 1) {
                EXPECT_LE(ch.char_end - ch.char_begin, params.max_chars);
            }
        }
        if (!chunks.empty()) {
            EXPECT_EQ(chunks.back().line_end, t.segments.size());
        }
    }
}

TEST(Chunk, OversizedLineIsItsOwnChunk) {
    AlignedTranscript t{"v", {{{0, 1000}, SegmentKind::kVisual, std::string(300, 'a')},
                              {{1000, 2000}, SegmentKind::kSpeech, "short"}}};
    const auto chunks = chunk(t, {50, 2});
    ASSERT_EQ(chunks.size(), 2u);
    EXPECT_EQ(chunks[0].line_end, 1u);
    EXPECT_EQ(chunks[1].line_begin, 1u);
}

TEST(Chunk, ZeroMaxCharsIsRejected) {
    AlignedTranscript t{"v", {{{0, 1000}, SegmentKind::kVisual, "x"}}};
    try {
        chunk(t, {0, 2});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kInvalidParams);
    }
}

TEST(Chunk, DefaultsFitWholeShortTranscript) {
    AlignedTranscript t{"v", {{{0, 1000}, SegmentKind::kVisual, "one"}, {{0, 1000}, SegmentKind::kSpeech, "two"}}};
    const auto chunks = chunk(t, {});
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_EQ(chunks[0].text, render(t));
}
