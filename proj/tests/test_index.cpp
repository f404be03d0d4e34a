// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "vidrag/error.hpp"
#include "vidrag/index.hpp"

using namespace vidrag;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = VIDRAG_FIXTURE_DIR;

fs::path temp_path(const std::string& name) {
    auto dir = fs::temp_directory_path() / "vidrag_test_index";
    fs::create_directories(dir);
    return dir / name;
}

void expect_matches_oracle(const VectorIndex& index, const std::vector<float>& q, const SearchOptions& opt,
                           const std::set<std::string>* allowed) {
    const auto expected = oracle::search(index, q, opt.k, opt.deduplicate_by_video, allowed);
    for (const auto& got : {search(index, q, opt), search_serial(index, q, opt)}) {
        ASSERT_EQ(got.size(), expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].rank, i + 1);
            EXPECT_EQ(got[i].entry_id, expected[i].first);
            EXPECT_EQ(got[i].score, expected[i].second);
            EXPECT_EQ(index.entry(got[i].entry_index).entry_id, got[i].entry_id);
        }
    }
}

}  // namespace

TEST(Search, MatchesFullSortOracle) {
    std::mt19937_64 rng(21);
    for (int round = 0; round < 60; ++round) {
        const std::size_t dim = round % 3 == 0 ? 4 : 16;
        const auto index = oracle::random_index(rng, 1 + rng() % 400, dim, 1 + rng() % 30);
        for (std::size_t k : {1u, 3u, 10u, 1000u}) {
            const auto q = oracle::random_vector(rng, dim);
            SearchOptions opt;
            opt.k = k;
            opt.deduplicate_by_video = round % 2 == 1;
            expect_matches_oracle(index, q, opt, nullptr);

            // Filter to a random subset of videos.
            std::vector<std::string> keep;
            for (const auto& v : index.videos()) {
                if (rng() % 2) keep.push_back(v);
            }
            const std::set<std::string> allowed(keep.begin(), keep.end());
            opt.video_mask = index.video_mask(keep);
            expect_matches_oracle(index, q, opt, &allowed);
        }
    }
}

TEST(Search, ZeroQueryScoresZeroAndOrdersById) {
    std::mt19937_64 rng(1);
    const auto index = oracle::random_index(rng, 20, 8, 5);
    SearchOptions opt;
    opt.k = 20;
    const auto got = search(index, std::vector<float>(8, 0.0f), opt);
    ASSERT_EQ(got.size(), 20u);
    for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].score, 0.0);
        if (i) {
            EXPECT_LT(got[i - 1].entry_id, got[i].entry_id);
        }
    }
}

TEST(Search, Errors) {
    VectorIndex empty(4);
    SearchOptions opt;
    EXPECT_THROW(search(empty, std::vector<float>(4, 1.0f), opt), Error);
    std::mt19937_64 rng(2);
    const auto index = oracle::random_index(rng, 5, 4, 2);
    EXPECT_THROW(search(index, std::vector<float>(3, 1.0f), opt), Error);
    opt.k = 0;
    EXPECT_THROW(search(index, std::vector<float>(4, 1.0f), opt), Error);
}

TEST(VectorIndex, AddNormalizesAndRejectsDuplicates) {
    VectorIndex index(3);
    const std::vector<float> v{3, 0, 4};
    index.add({"a#0", "a", {0, 1}}, v);
    EXPECT_FLOAT_EQ(index.vector(0)[0], 0.6f);
    EXPECT_FLOAT_EQ(index.vector(0)[2], 0.8f);
    EXPECT_THROW(index.add({"a#0", "a", {}}, v), Error);
    EXPECT_THROW(index.add({"b", "b", {}}, std::vector<float>{1, 2}), Error);
    index.add({"b", "b", {}}, v);
    index.add({"a#1", "a", {}}, v);
    EXPECT_EQ(index.video_count(), 2u);
    EXPECT_EQ(index.video_ordinal(2), 0u);
    const std::vector<std::string> only_b{"b", "nope"};
    EXPECT_EQ(index.video_mask(only_b), (std::vector<bool>{false, true}));
}

TEST(Persistence, RoundTripIsBitExact) {
    std::mt19937_64 rng(8);
    for (int round = 0; round < 10; ++round) {
        auto index = oracle::random_index(rng, rng() % 200 + 1, 8 + round, 7);
        IndexMeta meta;
        meta.embedding = {{"kind", "LOCAL_HASH"}, {"model", "m"}, {"dim", 8 + round}};
        meta.chunked = round % 2;
        meta.chunking = {100 + static_cast<std::size_t>(round), 1};
        index.set_meta(meta);
        const auto path = temp_path("rt" + std::to_string(round) + ".idx");
        save_index(index, path);
        const auto back = load_index(path);
        EXPECT_EQ(back, index);
        EXPECT_EQ(back.meta(), meta);
        for (std::size_t i = 0; i < index.size(); ++i) {
            const auto a = index.vector(i), b = back.vector(i);
            EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size_bytes()), 0);
        }
        // Saving the loaded copy reproduces the same bytes.
        const auto again = temp_path("rt_again.idx");
        save_index(back, again);
        std::ifstream x(path, std::ios::binary), y(again, std::ios::binary);
        EXPECT_EQ(std::string(std::istreambuf_iterator<char>(x), {}), std::string(std::istreambuf_iterator<char>(y), {}));
    }
}

TEST(Persistence, CorruptFilesRejected) {
    std::mt19937_64 rng(4);
    const auto index = oracle::random_index(rng, 10, 4, 3);
    const auto path = temp_path("good.idx");
    save_index(index, path);
    std::ifstream in(path, std::ios::binary);
    const std::string bytes(std::istreambuf_iterator<char>(in), {});

    auto expect_corrupt = [&](const std::string& data, const std::string& why) {
        const auto bad = temp_path("bad.idx");
        std::ofstream(bad, std::ios::binary) << data;
        fs::remove(sidecar_path(bad));
        try {
            load_index(bad);
            ADD_FAILURE() << why;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::kCorruptIndex) << why;
        }
    };
    expect_corrupt("XXXX" + bytes.substr(4), "magic");
    expect_corrupt(bytes.substr(0, bytes.size() - 3), "truncated");
    expect_corrupt(bytes + "!", "trailing");
    expect_corrupt(bytes.substr(0, 6), "header");

    std::ofstream(sidecar_path(path)) << "{not json";
    EXPECT_THROW(load_index(path), Error);
    try {
        load_index(temp_path("missing.idx"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kIoError);
    }
}

TEST(BuildIndex, MiniCatalogVariants) {
    const auto catalog = load_catalog(kFixtures + "/mini.jsonl");
    EmbeddingProviderSpec spec;
    spec.dim = 64;
    LocalHashEmbeddingProvider embedder(spec);

    BuildOptions opt;
    const auto aligned = build_index(catalog, embedder, opt);
    EXPECT_TRUE(aligned.skipped_video_ids.empty());
    EXPECT_TRUE(aligned.index.flags() & VectorIndex::kFlagChunked);
    EXPECT_EQ(aligned.index.video_count(), catalog.size());
    std::size_t expected_chunks = 0;
    for (const auto& v : catalog) expected_chunks += chunk(v.transcript(), opt.chunking).size();
    EXPECT_EQ(aligned.index.size(), expected_chunks);

    opt.variant = FieldVariant::kAsr;
    const auto asr = build_index(catalog, embedder, opt);
    EXPECT_EQ(asr.skipped_video_ids, std::vector<std::string>{"iceland-waterfalls"});
    EXPECT_EQ(asr.index.size(), catalog.size() - 1);

    // Entry vectors are the embedder's vectors for the stored text.
    auto shared = std::make_shared<const std::vector<VideoDocument>>(catalog);
    DocumentStore store(shared, aligned.index.meta());
    for (std::size_t i = 0; i < aligned.index.size(); ++i) {
        const auto text = store.text_of(aligned.index.entry(i));
        const auto v = hash_embed(text, 64);
        const auto row = aligned.index.vector(i);
        EXPECT_TRUE(std::equal(row.begin(), row.end(), v.values.begin()));
        const auto* c = store.chunk_of(aligned.index.entry(i).entry_id);
        ASSERT_NE(c, nullptr);
        EXPECT_EQ(c->time_span, aligned.index.entry(i).time_span);
    }
    EXPECT_THROW(build_index({}, embedder, opt), Error);
}
