// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "vidrag/embedding.hpp"
#include "vidrag/index.hpp"

namespace {

using namespace vidrag;

std::vector<std::string> corpus_texts(std::size_t n) {
    static const char* words[] = {"ramen", "broth", "kombu", "tram", "ticket", "shrine", "gate", "tire",
                                  "patch", "starter", "crumb", "chord", "fret", "waterfall", "beach", "pot"};
    std::mt19937_64 rng(42);
    std::vector<std::string> out(n);
    for (auto& t : out) {
        for (int w = 0; w < 60; ++w) {
            if (w) t += ' ';
            t += words[rng() % 16];
        }
    }
    return out;
}

const VectorIndex& bench_index(std::size_t n, std::size_t dim) {
    static std::map<std::pair<std::size_t, std::size_t>, VectorIndex> cache;
    auto& slot = cache[{n, dim}];
    if (slot.empty()) {
        slot = VectorIndex(dim);
        std::mt19937_64 rng(7);
        std::normal_distribution<float> g;
        std::vector<float> v(dim);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& x : v) x = g(rng);
            const auto vid = "v" + std::to_string(i / 4);
            slot.add({vid + "#" + std::to_string(i % 4), vid, {}}, v);
        }
    }
    return slot;
}

template <auto Search>
void BM_Search(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto& index = bench_index(n, 256);
    std::vector<float> q(256, 0.5f);
    SearchOptions opt;
    opt.k = 10;
    opt.deduplicate_by_video = true;
    for (auto _ : state) benchmark::DoNotOptimize(Search(index, q, opt));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <auto Embed>
void BM_Embed(benchmark::State& state) {
    const auto texts = corpus_texts(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Embed(texts, 256));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

std::vector<RetrievalResult> search_parallel(const VectorIndex& i, std::span<const float> q, const SearchOptions& o) {
    return search(i, q, o);
}
std::vector<EmbeddingVector> embed_parallel(std::span<const std::string> t, std::size_t d) {
    return hash_embed_batch(t, d);
}

}  // namespace

BENCHMARK(BM_Search<search_serial>)->Name("search/serial")->Arg(10'000)->Arg(100'000);
BENCHMARK(BM_Search<search_parallel>)->Name("search/openmp")->Arg(10'000)->Arg(100'000);
BENCHMARK(BM_Embed<hash_embed_batch_serial>)->Name("hash_embed_batch/serial")->Arg(2'000);
BENCHMARK(BM_Embed<embed_parallel>)->Name("hash_embed_batch/openmp")->Arg(2'000);

BENCHMARK_MAIN();
