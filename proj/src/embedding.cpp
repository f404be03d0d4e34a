// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>

#include "vidrag/error.hpp"
#include "vidrag/hash.hpp"

namespace vidrag {

using json = nlohmann::json;

namespace {

bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80;
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    for (char raw : text) {
        auto c = static_cast<unsigned char>(raw);
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        if (is_word_byte(c)) {
            current.push_back(static_cast<char>(c));
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

void add_feature(std::vector<float>& acc, std::string_view feature) {
    const auto h = stable_hash64(feature);
    const auto bucket = static_cast<std::size_t>(h % acc.size());
    acc[bucket] += (h >> 63) ? -1.0f : 1.0f;
}

bool blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

}  // namespace

double l2_norm(std::span<const float> values) {
    double sum = 0.0;
    for (float v : values) sum += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(sum);
}

void l2_normalize(std::span<float> values) {
    const double norm = l2_norm(values);
    if (norm == 0.0) return;
    for (float& v : values) v = static_cast<float>(static_cast<double>(v) / norm);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += static_cast<double>(a.values[i]) * static_cast<double>(b.values[i]);
    }
    const double na = l2_norm(a.values);
    const double nb = l2_norm(b.values);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

EmbeddingVector hash_embed(std::string_view text, std::size_t dim) {
    if (dim == 0) throw Error(ErrorCode::kInvalidParams, "embedding dim must be positive");
    EmbeddingVector out{std::vector<float>(dim, 0.0f)};
    const auto words = split_words(text);
    if (words.empty()) return out;

    std::string feature;
    for (std::size_t i = 0; i < words.size(); ++i) {
        feature = "w:" + words[i];
        add_feature(out.values, feature);
        if (i + 1 < words.size()) {
            feature = "b:" + words[i] + ' ' + words[i + 1];
            add_feature(out.values, feature);
        }
    }
    std::string joined = " ";
    for (const auto& w : words) {
        joined += w;
        joined += ' ';
    }
    for (std::size_t i = 0; i + 3 <= joined.size(); ++i) {
        feature = "c:" + joined.substr(i, 3);
        add_feature(out.values, feature);
    }
    l2_normalize(out.values);
    return out;
}

std::vector<EmbeddingVector> hash_embed_batch(std::span<const std::string> texts, std::size_t dim) {
    if (dim == 0) throw Error(ErrorCode::kInvalidParams, "embedding dim must be positive");
    std::vector<EmbeddingVector> out(texts.size());
    const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = hash_embed(texts[static_cast<std::size_t>(i)], dim);
    }
    return out;
}

std::vector<EmbeddingVector> hash_embed_batch_serial(std::span<const std::string> texts, std::size_t dim) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hash_embed(t, dim));
    return out;
}

void EmbeddingProviderSpec::validate() const {
    if (dim == 0) throw Error(ErrorCode::kInvalidParams, "embedding dim must be positive");
    if (batch_limit == 0 || max_in_flight == 0) {
        throw Error(ErrorCode::kInvalidParams, "batch_limit and max_in_flight must be positive");
    }
    if (kind == EmbeddingKind::kRemote && (endpoint.empty() || (api_key_env.empty() && api_key.empty()))) {
        throw Error(ErrorCode::kInvalidParams, "REMOTE embedding provider needs an endpoint and a credential");
    }
}

nlohmann::ordered_json EmbeddingProviderSpec::describe() const {
    nlohmann::ordered_json j;
    j["kind"] = kind == EmbeddingKind::kRemote ? "REMOTE" : "LOCAL_HASH";
    j["model"] = model_name;
    j["dim"] = dim;
    if (kind == EmbeddingKind::kRemote) {
        j["endpoint"] = endpoint;
        j["api_key_env"] = api_key_env;
    }
    return j;
}

EmbeddingProviderSpec EmbeddingProviderSpec::from_json(const json& j) {
    EmbeddingProviderSpec spec;
    const auto kind = j.value("kind", std::string("LOCAL_HASH"));
    if (kind == "REMOTE") {
        spec.kind = EmbeddingKind::kRemote;
        spec.model_name = "text-embedding-3-small";
        spec.dim = 1536;
    } else if (kind == "LOCAL_HASH") {
        spec.kind = EmbeddingKind::kLocalHash;
        spec.batch_limit = 4096;
        spec.max_in_flight = 1;
    } else {
        throw Error(ErrorCode::kInvalidParams, "unknown embedding kind '" + kind + "'");
    }
    spec.model_name = j.value("model", spec.model_name);
    spec.dim = j.value("dim", spec.dim);
    spec.endpoint = j.value("endpoint", spec.endpoint);
    spec.api_key_env = j.value("api_key_env", spec.api_key_env);
    spec.batch_limit = j.value("batch_limit", spec.batch_limit);
    spec.max_in_flight = j.value("max_in_flight", spec.max_in_flight);
    spec.retry.max_attempts = j.value("max_attempts", spec.retry.max_attempts);
    spec.retry.initial_backoff = std::chrono::milliseconds(j.value("backoff_ms", spec.retry.initial_backoff.count()));
    return spec;
}

EmbeddingProvider::EmbeddingProvider(EmbeddingProviderSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_batch(const std::vector<std::string>& texts) const {
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (blank(texts[i])) throw Error(ErrorCode::kEmptyText, "input " + std::to_string(i) + " is blank", i);
    }
    std::vector<EmbeddingVector> out(texts.size());
    const std::span<const std::string> all(texts);
    const auto limit = spec_.batch_limit;
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s < texts.size(); s += limit) starts.push_back(s);

    auto run = [&](std::size_t start) {
        const auto count = std::min(limit, texts.size() - start);
        auto vectors = embed_sub_batch(all.subspan(start, count));
        if (vectors.size() != count) {
            throw Error(ErrorCode::kProviderError, "provider returned " + std::to_string(vectors.size()) +
                                                       " vectors for " + std::to_string(count) + " inputs");
        }
        for (std::size_t i = 0; i < count; ++i) {
            if (vectors[i].dim() != spec_.dim) {
                throw Error(ErrorCode::kProviderError, "provider returned dim " + std::to_string(vectors[i].dim()) +
                                                           ", expected " + std::to_string(spec_.dim));
            }
            l2_normalize(vectors[i].values);
            out[start + i] = std::move(vectors[i]);
        }
    };

    if (spec_.max_in_flight <= 1 || starts.size() <= 1) {
        for (auto s : starts) run(s);
        return out;
    }
    for (std::size_t wave = 0; wave < starts.size(); wave += spec_.max_in_flight) {
        std::vector<std::future<void>> pending;
        const auto wave_end = std::min(starts.size(), wave + spec_.max_in_flight);
        for (std::size_t b = wave; b < wave_end; ++b) {
            pending.push_back(std::async(std::launch::async, run, starts[b]));
        }
        for (auto& f : pending) f.wait();
        for (auto& f : pending) f.get();
    }
    return out;
}

EmbeddingVector EmbeddingProvider::embed(const std::string& text) const {
    return std::move(embed_batch({text}).front());
}

LocalHashEmbeddingProvider::LocalHashEmbeddingProvider(EmbeddingProviderSpec spec)
    : EmbeddingProvider(std::move(spec)) {}

std::vector<EmbeddingVector> LocalHashEmbeddingProvider::embed_sub_batch(std::span<const std::string> texts) const {
    return hash_embed_batch(texts, dim());
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(EmbeddingProviderSpec spec)
    : EmbeddingProvider(std::move(spec)) {}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed_sub_batch(std::span<const std::string> texts) const {
    json request;
    request["model"] = spec().model_name;
    request["input"] = json::array();
    for (const auto& t : texts) request["input"].push_back(t);

    std::string key = spec().api_key;
    if (key.empty() && !spec().api_key_env.empty()) {
        if (const char* env = std::getenv(spec().api_key_env.c_str())) key = env;
    }
    const auto body = post_json(spec().endpoint, "/embeddings", request.dump(), key, spec().retry);

    std::vector<EmbeddingVector> out(texts.size());
    std::vector<bool> filled(texts.size(), false);
    try {
        const auto response = json::parse(body);
        for (const auto& item : response.at("data")) {
            const auto index = item.at("index").get<std::size_t>();
            if (index >= out.size() || filled[index]) throw Error(ErrorCode::kProviderError, "bad embedding index");
            out[index].values = item.at("embedding").get<std::vector<float>>();
            filled[index] = true;
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kProviderError, std::string("malformed embedding response: ") + e.what());
    }
    if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
        throw Error(ErrorCode::kProviderError, "embedding response is missing inputs");
    }
    return out;
}

std::shared_ptr<const EmbeddingProvider> make_embedding_provider(const EmbeddingProviderSpec& spec) {
    if (spec.kind == EmbeddingKind::kRemote) return std::make_shared<RemoteEmbeddingProvider>(spec);
    return std::make_shared<LocalHashEmbeddingProvider>(spec);
}

}  // namespace vidrag
