// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

// Exact cosine top-K store. Vectors are unit-normalized on insert and kept in
// one row-major matrix; search scans every row.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "vidrag/catalog.hpp"
#include "vidrag/embedding.hpp"
#include "vidrag/transcript.hpp"

namespace vidrag {

struct IndexEntry {
    std::string entry_id;  // "video_id#chunk_index" or "video_id"
    std::string video_id;
    TimeSpan time_span;    // zero span for whole-video entries

    friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

/// Build-time settings recorded in the JSON sidecar next to the index file.
struct IndexMeta {
    nlohmann::ordered_json embedding = nlohmann::ordered_json::object();
    FieldVariant variant = FieldVariant::kAlignedTranscript;
    bool chunked = false;
    ChunkParams chunking;

    nlohmann::ordered_json to_json() const;
    static IndexMeta from_json(const nlohmann::ordered_json& j);
    friend bool operator==(const IndexMeta&, const IndexMeta&) = default;
};

class VectorIndex {
public:
    static constexpr std::uint8_t kFlagChunked = 0x01;

    VectorIndex() = default;
    explicit VectorIndex(std::size_t dim, std::uint8_t flags = 0);

    /// Normalizes `vector` to unit length unless told it already is (loading
    /// stores vectors bit-exactly). Throws Error(kDimensionMismatch) or
    /// Error(kInvalidParams) for a duplicate entry_id.
    void add(IndexEntry entry, std::span<const float> vector, bool normalize = true);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::uint8_t flags() const noexcept { return flags_; }

    const IndexEntry& entry(std::size_t i) const { return entries_[i]; }
    const std::vector<IndexEntry>& entries() const noexcept { return entries_; }
    std::span<const float> vector(std::size_t i) const {
        return std::span<const float>(matrix_).subspan(i * dim_, dim_);
    }

    /// Dense per-entry video ordinals (first-seen order) used by dedup and filters.
    std::uint32_t video_ordinal(std::size_t i) const { return video_ordinals_[i]; }
    const std::vector<std::string>& videos() const noexcept { return videos_; }
    std::size_t video_count() const noexcept { return videos_.size(); }

    /// Mask over video ordinals admitting only the given ids.
    std::vector<bool> video_mask(std::span<const std::string> video_ids) const;

    const IndexMeta& meta() const noexcept { return meta_; }
    void set_meta(IndexMeta meta) { meta_ = std::move(meta); }

    friend bool operator==(const VectorIndex& a, const VectorIndex& b);

private:
    std::size_t dim_ = 0;
    std::uint8_t flags_ = 0;
    std::vector<IndexEntry> entries_;
    std::vector<float> matrix_;
    std::vector<std::uint32_t> video_ordinals_;
    std::vector<std::string> videos_;
    std::unordered_map<std::string, std::uint32_t> video_lookup_;
    std::unordered_map<std::string, std::size_t> id_lookup_;
    IndexMeta meta_;
};

struct RetrievalResult {
    std::size_t rank = 0;  // 1-based
    std::string entry_id;
    std::string video_id;
    double score = 0.0;
    TimeSpan time_span;
    std::size_t entry_index = 0;

    friend bool operator==(const RetrievalResult&, const RetrievalResult&) = default;
};

struct SearchOptions {
    std::size_t k = 5;
    /// Keep only each video's best entry; k then counts videos.
    bool deduplicate_by_video = false;
    /// Indexed by video ordinal; unset admits every video.
    std::optional<std::vector<bool>> video_mask;
};

/// Score of an entry: sum over i of v[i] * (q[i] / |q|), accumulated in
/// double in index order, clamped to [-1, 1]; 0 for a zero query. Results
/// are ordered by (score descending, entry_id ascending).
/// Throws Error(kDimensionMismatch), Error(kEmptyIndex), Error(kInvalidParams).
std::vector<RetrievalResult> search(const VectorIndex& index, std::span<const float> query,
                                    const SearchOptions& options);

/// Single-threaded reference with the same contract as search().
std::vector<RetrievalResult> search_serial(const VectorIndex& index, std::span<const float> query,
                                           const SearchOptions& options);

struct BuildOptions {
    FieldVariant variant = FieldVariant::kAlignedTranscript;
    ChunkParams chunking;
    bool chunk_asr = false;
};

struct BuildResult {
    VectorIndex index;
    std::vector<std::string> skipped_video_ids;  // empty text for the variant
};

/// ALIGNED_TRANSCRIPT (and ASR when chunk_asr is set) is indexed one entry
/// per chunk; other variants one entry per video.
/// Throws Error(kEmptyCatalog), Error(kNoIndexableText), Error(kProviderError).
BuildResult build_index(const std::vector<VideoDocument>& catalog, const EmbeddingProvider& provider,
                        const BuildOptions& options);

/// Writes the binary index and `<path>.json` sidecar. Throws Error(kIoError).
void save_index(const VectorIndex& index, const std::filesystem::path& path);
/// Throws Error(kIoError) or Error(kCorruptIndex). A missing sidecar leaves
/// default metadata.
VectorIndex load_index(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& index_path);

/// Resolves index entries back to their text (variant text or chunk).
class DocumentStore {
public:
    using Catalog = std::shared_ptr<const std::vector<VideoDocument>>;

    DocumentStore(Catalog catalog, const IndexMeta& meta);

    const Catalog& catalog() const noexcept { return catalog_; }

    const VideoDocument& video(const std::string& video_id) const;
    bool contains(const std::string& video_id) const { return by_id_.count(video_id) != 0; }
    /// Chunk for a chunked entry id; nullptr for whole-video entries.
    const Chunk* chunk_of(const std::string& entry_id) const;
    std::string text_of(const IndexEntry& entry) const;
    std::string text_of(const RetrievalResult& result) const;
    const std::string& rendered_transcript(const std::string& video_id) const;

private:
    Catalog catalog_;
    IndexMeta meta_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::string, std::vector<Chunk>> chunks_;
    std::unordered_map<std::string, std::string> rendered_;
};

}  // namespace vidrag
