// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vidrag/http.hpp"

namespace vidrag {

struct EmbeddingVector {
    std::vector<float> values;

    std::size_t dim() const noexcept { return values.size(); }
    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

double l2_norm(std::span<const float> values);

/// Scales to unit length in place; the zero vector is left untouched.
void l2_normalize(std::span<float> values);

/// dot(a, b) / (|a| |b|) clamped to [-1, 1]; 0 when either norm is 0.
/// Throws Error(kDimensionMismatch).
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Deterministic feature-hashing embedder. The text is ASCII-lowercased and
/// split into words (runs of ASCII alphanumerics or non-ASCII bytes).
/// Features are word unigrams ("w:"), adjacent-word bigrams ("b:") and
/// character trigrams ("c:") over the words joined by single spaces with a
/// space on each side. Each feature adds +1 or -1 (bit 63 of its
/// stable_hash64) to bucket hash % dim; the sum is L2-normalized.
/// Text with no words yields the zero vector.
EmbeddingVector hash_embed(std::string_view text, std::size_t dim);

/// OpenMP-parallel over texts; output order matches input order.
std::vector<EmbeddingVector> hash_embed_batch(std::span<const std::string> texts, std::size_t dim);
/// Single-threaded reference for tests and benchmarks.
std::vector<EmbeddingVector> hash_embed_batch_serial(std::span<const std::string> texts, std::size_t dim);

enum class EmbeddingKind { kRemote, kLocalHash };

struct EmbeddingProviderSpec {
    EmbeddingKind kind = EmbeddingKind::kLocalHash;
    std::string model_name = "feature-hash-v1";
    std::size_t dim = 256;
    std::string endpoint;      // REMOTE: base URL, e.g. https://api.openai.com/v1
    std::string api_key_env;   // REMOTE: name of the env var holding the key
    std::string api_key;       // resolved at runtime, never serialized
    std::size_t batch_limit = 64;
    std::size_t max_in_flight = 4;
    RetryPolicy retry;

    /// Throws Error(kInvalidParams) on a violated invariant.
    void validate() const;
    /// Provider identity used in sidecars and reports (no credentials).
    nlohmann::ordered_json describe() const;
    static EmbeddingProviderSpec from_json(const nlohmann::json& j);
};

class EmbeddingProvider {
public:
    explicit EmbeddingProvider(EmbeddingProviderSpec spec);
    virtual ~EmbeddingProvider() = default;

    const EmbeddingProviderSpec& spec() const noexcept { return spec_; }
    std::size_t dim() const noexcept { return spec_.dim; }

    /// One unit-norm vector per text, in input order. Splits into batches of
    /// at most spec().batch_limit, running up to spec().max_in_flight at once.
    /// Throws Error(kEmptyText, index) for blank inputs and
    /// Error(kProviderError) on failure.
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const;
    EmbeddingVector embed(const std::string& text) const;

protected:
    virtual std::vector<EmbeddingVector> embed_sub_batch(std::span<const std::string> texts) const = 0;

private:
    EmbeddingProviderSpec spec_;
};

class LocalHashEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit LocalHashEmbeddingProvider(EmbeddingProviderSpec spec);

protected:
    std::vector<EmbeddingVector> embed_sub_batch(std::span<const std::string> texts) const override;
};

/// Speaks `POST {endpoint}/embeddings` with `{model, input}` and reads
/// `data[].{index, embedding}`.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit RemoteEmbeddingProvider(EmbeddingProviderSpec spec);

protected:
    std::vector<EmbeddingVector> embed_sub_batch(std::span<const std::string> texts) const override;
};

std::shared_ptr<const EmbeddingProvider> make_embedding_provider(const EmbeddingProviderSpec& spec);

}  // namespace vidrag
