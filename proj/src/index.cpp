// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "vidrag/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vidrag {

namespace {

constexpr char kMagic[4] = {'V', 'R', 'I', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

// Scored candidate; `better` is the total result order.
struct Scored {
    double score;
    std::size_t index;
};

struct BetterThan {
    const VectorIndex* index;
    bool operator()(const Scored& a, const Scored& b) const {
        if (a.score != b.score) return a.score > b.score;
        return index->entry(a.index).entry_id < index->entry(b.index).entry_id;
    }
};

std::vector<double> normalized_query(const VectorIndex& index, std::span<const float> query,
                                     const SearchOptions& options) {
    if (options.k == 0) throw Error(ErrorCode::kInvalidParams, "k must be at least 1");
    if (index.empty()) throw Error(ErrorCode::kEmptyIndex, "index has no entries");
    if (query.size() != index.dim()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "query dim " + std::to_string(query.size()) + " vs index dim " + std::to_string(index.dim()));
    }
    if (options.video_mask && options.video_mask->size() != index.video_count()) {
        throw Error(ErrorCode::kInvalidParams, "video mask size does not match index");
    }
    const double norm = l2_norm(query);
    std::vector<double> q(query.size(), 0.0);
    if (norm == 0.0) return q;
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = static_cast<double>(query[i]) / norm;
    return q;
}

double score_row(std::span<const float> row, const std::vector<double>& q) {
    double dot = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) dot += static_cast<double>(row[i]) * q[i];
    return std::clamp(dot, -1.0, 1.0);
}

bool admitted(const VectorIndex& index, const SearchOptions& options, std::size_t i) {
    return !options.video_mask || (*options.video_mask)[index.video_ordinal(i)];
}

std::vector<RetrievalResult> to_results(const VectorIndex& index, const std::vector<Scored>& ranked) {
    std::vector<RetrievalResult> out;
    out.reserve(ranked.size());
    for (const auto& s : ranked) {
        const auto& e = index.entry(s.index);
        out.push_back({out.size() + 1, e.entry_id, e.video_id, s.score, e.time_span, s.index});
    }
    return out;
}

// Best entry per video, then the k best videos.
std::vector<Scored> top_k_dedup(const VectorIndex& index, const std::vector<double>& scores,
                                const SearchOptions& options, const BetterThan& better) {
    std::vector<Scored> best(index.video_count(), Scored{0.0, index.size()});
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (!admitted(index, options, i)) continue;
        auto& slot = best[index.video_ordinal(i)];
        const Scored cand{scores[i], i};
        if (slot.index == index.size() || better(cand, slot)) slot = cand;
    }
    std::erase_if(best, [&](const Scored& s) { return s.index == index.size(); });
    const auto k = std::min(options.k, best.size());
    std::partial_sort(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(k), best.end(), better);
    best.resize(k);
    return best;
}

// Keeps the k best in a heap whose front is the worst kept element.
void offer(std::vector<Scored>& heap, std::size_t k, const Scored& cand, const BetterThan& better) {
    if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), better);
    } else if (better(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), better);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), better);
    }
}

class ByteWriter {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const char*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    template <typename T>
    void le(T value) {
        using U = std::make_unsigned_t<T>;
        auto u = static_cast<U>(value);
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            buf_.push_back(static_cast<char>(u & 0xff));
            u = static_cast<U>(u >> 8);
        }
    }
    void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
    const std::vector<char>& data() const { return buf_; }

private:
    std::vector<char> buf_;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<char>& data) : data_(data) {}

    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw Error(ErrorCode::kCorruptIndex, "truncated index file");
    }
    template <typename T>
    T le() {
        need(sizeof(T));
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }
    float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
    std::string str(std::size_t n) {
        need(n);
        std::string s(data_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    const std::vector<char>& data_;
    std::size_t pos_ = 0;
};

}  // namespace

nlohmann::ordered_json IndexMeta::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "VRIX";
    j["version"] = kFormatVersion;
    j["embedding"] = embedding;
    j["variant"] = field_variant_name(variant);
    j["chunked"] = chunked;
    j["chunking"] = {{"max_chars", chunking.max_chars}, {"overlap_lines", chunking.overlap_lines}};
    return j;
}

IndexMeta IndexMeta::from_json(const nlohmann::ordered_json& j) {
    IndexMeta meta;
    try {
        meta.embedding = j.at("embedding");
        const auto variant = parse_field_variant(j.at("variant").get<std::string>());
        if (!variant) throw Error(ErrorCode::kCorruptIndex, "unknown variant in sidecar");
        meta.variant = *variant;
        meta.chunked = j.at("chunked").get<bool>();
        meta.chunking.max_chars = j.at("chunking").at("max_chars").get<std::size_t>();
        meta.chunking.overlap_lines = j.at("chunking").at("overlap_lines").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kCorruptIndex, std::string("bad index sidecar: ") + e.what());
    }
    return meta;
}

VectorIndex::VectorIndex(std::size_t dim, std::uint8_t flags) : dim_(dim), flags_(flags) {
    if (dim == 0) throw Error(ErrorCode::kInvalidParams, "index dim must be positive");
}

void VectorIndex::add(IndexEntry entry, std::span<const float> vector, bool normalize) {
    if (vector.size() != dim_) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "vector dim " + std::to_string(vector.size()) + " vs index dim " + std::to_string(dim_));
    }
    if (!id_lookup_.emplace(entry.entry_id, entries_.size()).second) {
        throw Error(ErrorCode::kInvalidParams, "duplicate entry id '" + entry.entry_id + "'");
    }
    auto [it, inserted] = video_lookup_.emplace(entry.video_id, static_cast<std::uint32_t>(videos_.size()));
    if (inserted) videos_.push_back(entry.video_id);
    video_ordinals_.push_back(it->second);

    const auto offset = matrix_.size();
    matrix_.insert(matrix_.end(), vector.begin(), vector.end());
    if (normalize) l2_normalize(std::span<float>(matrix_).subspan(offset, dim_));
    entries_.push_back(std::move(entry));
}

std::vector<bool> VectorIndex::video_mask(std::span<const std::string> video_ids) const {
    std::vector<bool> mask(videos_.size(), false);
    for (const auto& id : video_ids) {
        if (auto it = video_lookup_.find(id); it != video_lookup_.end()) mask[it->second] = true;
    }
    return mask;
}

bool operator==(const VectorIndex& a, const VectorIndex& b) {
    return a.dim_ == b.dim_ && a.flags_ == b.flags_ && a.entries_ == b.entries_ &&
           a.matrix_.size() == b.matrix_.size() &&
           std::memcmp(a.matrix_.data(), b.matrix_.data(), a.matrix_.size() * sizeof(float)) == 0 &&
           a.meta_ == b.meta_;
}

std::vector<RetrievalResult> search(const VectorIndex& index, std::span<const float> query,
                                    const SearchOptions& options) {
    const auto q = normalized_query(index, query, options);
    const auto n = static_cast<std::ptrdiff_t>(index.size());
    const BetterThan better{&index};

    std::vector<double> scores(index.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        scores[static_cast<std::size_t>(i)] = score_row(index.vector(static_cast<std::size_t>(i)), q);
    }

    if (options.deduplicate_by_video) return to_results(index, top_k_dedup(index, scores, options, better));

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::vector<std::vector<Scored>> local(static_cast<std::size_t>(threads));
#pragma omp parallel num_threads(threads)
    {
        int tid = 0;
#ifdef _OPENMP
        tid = omp_get_thread_num();
#endif
        auto& heap = local[static_cast<std::size_t>(tid)];
        heap.reserve(options.k + 1);
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            if (admitted(index, options, idx)) offer(heap, options.k, Scored{scores[idx], idx}, better);
        }
    }
    std::vector<Scored> merged;
    for (const auto& heap : local) {
        for (const auto& s : heap) offer(merged, options.k, s, better);
    }
    std::sort(merged.begin(), merged.end(), better);
    return to_results(index, merged);
}

std::vector<RetrievalResult> search_serial(const VectorIndex& index, std::span<const float> query,
                                           const SearchOptions& options) {
    const auto q = normalized_query(index, query, options);
    const BetterThan better{&index};
    std::vector<double> scores(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) scores[i] = score_row(index.vector(i), q);

    if (options.deduplicate_by_video) return to_results(index, top_k_dedup(index, scores, options, better));

    std::vector<Scored> all;
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (admitted(index, options, i)) all.push_back({scores[i], i});
    }
    std::sort(all.begin(), all.end(), better);
    if (all.size() > options.k) all.resize(options.k);
    return to_results(index, all);
}

BuildResult build_index(const std::vector<VideoDocument>& catalog, const EmbeddingProvider& provider,
                        const BuildOptions& options) {
    if (catalog.empty()) throw Error(ErrorCode::kEmptyCatalog, "catalog has no videos");
    const bool chunked = options.variant == FieldVariant::kAlignedTranscript ||
                         (options.variant == FieldVariant::kAsr && options.chunk_asr);

    BuildResult result;
    std::vector<IndexEntry> entries;
    std::vector<std::string> texts;
    for (const auto& video : catalog) {
        if (chunked) {
            const auto transcript = options.variant == FieldVariant::kAsr
                                        ? align({}, video.cues, video.video_id)
                                        : video.transcript();
            const auto chunks = chunk(transcript, options.chunking);
            if (chunks.empty()) {
                result.skipped_video_ids.push_back(video.video_id);
                continue;
            }
            for (const auto& c : chunks) {
                entries.push_back({video.video_id + "#" + std::to_string(c.chunk_index), video.video_id, c.time_span});
                texts.push_back(c.text);
            }
        } else {
            auto text = field_text(video, options.variant);
            if (normalize_caption_text(text).empty()) {
                result.skipped_video_ids.push_back(video.video_id);
                continue;
            }
            entries.push_back({video.video_id, video.video_id, TimeSpan{}});
            texts.push_back(std::move(text));
        }
    }
    if (entries.empty()) {
        throw Error(ErrorCode::kNoIndexableText,
                    "no video has text for variant " + std::string(field_variant_name(options.variant)));
    }

    const auto vectors = provider.embed_batch(texts);
    result.index = VectorIndex(provider.dim(), chunked ? VectorIndex::kFlagChunked : 0);
    for (std::size_t i = 0; i < entries.size(); ++i) result.index.add(std::move(entries[i]), vectors[i].values);

    IndexMeta meta;
    meta.embedding = provider.spec().describe();
    meta.variant = options.variant;
    meta.chunked = chunked;
    meta.chunking = options.chunking;
    result.index.set_meta(std::move(meta));
    return result;
}

std::filesystem::path sidecar_path(const std::filesystem::path& index_path) {
    auto p = index_path;
    p += ".json";
    return p;
}

void save_index(const VectorIndex& index, const std::filesystem::path& path) {
    ByteWriter w;
    w.bytes(kMagic, sizeof(kMagic));
    w.le<std::uint32_t>(kFormatVersion);
    w.le<std::uint32_t>(static_cast<std::uint32_t>(index.dim()));
    w.le<std::uint8_t>(index.flags());
    w.le<std::uint64_t>(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const auto& e = index.entry(i);
        if (e.entry_id.size() > 0xffff) throw Error(ErrorCode::kIoError, "entry id too long: " + e.entry_id);
        w.le<std::uint16_t>(static_cast<std::uint16_t>(e.entry_id.size()));
        w.bytes(e.entry_id.data(), e.entry_id.size());
        w.le<std::uint32_t>(static_cast<std::uint32_t>(e.video_id.size()));
        w.bytes(e.video_id.data(), e.video_id.size());
        w.le<std::uint64_t>(static_cast<std::uint64_t>(e.time_span.start_ms));
        w.le<std::uint64_t>(static_cast<std::uint64_t>(e.time_span.end_ms));
        for (float v : index.vector(i)) w.f32(v);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
    out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());

    std::ofstream side(sidecar_path(path), std::ios::trunc);
    if (!side) throw Error(ErrorCode::kIoError, "cannot write " + sidecar_path(path).string());
    auto meta = index.meta().to_json();
    meta["entries"] = index.size();
    side << meta.dump(2) << '\n';
}

VectorIndex load_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open index " + path.string());
    const std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    ByteReader r(data);
    if (r.str(4) != std::string(kMagic, 4)) throw Error(ErrorCode::kCorruptIndex, "bad magic bytes");
    const auto version = r.le<std::uint32_t>();
    if (version != kFormatVersion) {
        throw Error(ErrorCode::kCorruptIndex, "unsupported format version " + std::to_string(version));
    }
    const auto dim = r.le<std::uint32_t>();
    const auto flags = r.le<std::uint8_t>();
    const auto count = r.le<std::uint64_t>();
    if (dim == 0) throw Error(ErrorCode::kCorruptIndex, "zero dimension");
    const std::uint64_t min_entry = 2 + 4 + 16 + 4ULL * dim;
    if (count > r.remaining() / min_entry) throw Error(ErrorCode::kCorruptIndex, "entry count exceeds file size");

    VectorIndex index(dim, flags);
    std::vector<float> vec(dim);
    for (std::uint64_t n = 0; n < count; ++n) {
        IndexEntry e;
        e.entry_id = r.str(r.le<std::uint16_t>());
        e.video_id = r.str(r.le<std::uint32_t>());
        e.time_span.start_ms = static_cast<std::int64_t>(r.le<std::uint64_t>());
        e.time_span.end_ms = static_cast<std::int64_t>(r.le<std::uint64_t>());
        for (auto& v : vec) v = r.f32();
        try {
            index.add(std::move(e), vec, false);
        } catch (const Error& err) {
            throw Error(ErrorCode::kCorruptIndex, err.what());
        }
    }
    if (r.remaining() != 0) throw Error(ErrorCode::kCorruptIndex, "trailing bytes after last entry");

    if (std::ifstream side(sidecar_path(path)); side) {
        try {
            index.set_meta(IndexMeta::from_json(nlohmann::ordered_json::parse(side)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::kCorruptIndex, std::string("bad index sidecar: ") + e.what());
        }
    }
    return index;
}

DocumentStore::DocumentStore(Catalog catalog, const IndexMeta& meta) : catalog_(std::move(catalog)), meta_(meta) {
    for (std::size_t i = 0; i < catalog_->size(); ++i) {
        const auto& video = (*catalog_)[i];
        by_id_.emplace(video.video_id, i);
        const auto transcript = video.transcript();
        rendered_.emplace(video.video_id, render(transcript));
        if (meta_.chunked) {
            const auto source = meta_.variant == FieldVariant::kAsr ? align({}, video.cues, video.video_id) : transcript;
            chunks_.emplace(video.video_id, chunk(source, meta_.chunking));
        }
    }
}

const VideoDocument& DocumentStore::video(const std::string& video_id) const {
    const auto it = by_id_.find(video_id);
    if (it == by_id_.end()) throw Error(ErrorCode::kNotFound, "unknown video '" + video_id + "'");
    return (*catalog_)[it->second];
}

const Chunk* DocumentStore::chunk_of(const std::string& entry_id) const {
    const auto hash = entry_id.rfind('#');
    if (!meta_.chunked || hash == std::string::npos) return nullptr;
    const auto it = chunks_.find(entry_id.substr(0, hash));
    if (it == chunks_.end()) return nullptr;
    std::size_t idx = 0;
    try {
        idx = std::stoul(entry_id.substr(hash + 1));
    } catch (const std::exception&) {
        return nullptr;
    }
    return idx < it->second.size() ? &it->second[idx] : nullptr;
}

std::string DocumentStore::text_of(const IndexEntry& entry) const {
    if (const auto* c = chunk_of(entry.entry_id)) return c->text;
    return field_text(video(entry.video_id), meta_.variant);
}

std::string DocumentStore::text_of(const RetrievalResult& result) const {
    return text_of(IndexEntry{result.entry_id, result.video_id, result.time_span});
}

const std::string& DocumentStore::rendered_transcript(const std::string& video_id) const {
    const auto it = rendered_.find(video_id);
    if (it == rendered_.end()) throw Error(ErrorCode::kNotFound, "unknown video '" + video_id + "'");
    return it->second;
}

}  // namespace vidrag
