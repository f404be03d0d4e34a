// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

// Query answering: route to a retriever tool, search, synthesize a typed
// answer whose citations are checked against what was actually retrieved.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "vidrag/catalog.hpp"
#include "vidrag/embedding.hpp"
#include "vidrag/index.hpp"
#include "vidrag/llm.hpp"

namespace vidrag {

/// A named retrieval scope over part of the catalog.
struct RetrieverTool {
    std::string tool_id;
    std::string description;
    std::vector<std::string> video_ids;
};

/// Throws Error(kNoTools) for an empty list, Error(kInvalidParams) for a
/// blank or duplicate id or an empty filter.
void validate_tools(const std::vector<RetrieverTool>& tools);

/// Parses `[{id, description, videos}]`; `"videos": "*"` expands to every
/// catalog video.
std::vector<RetrieverTool> tools_from_json(const nlohmann::json& j, const std::vector<VideoDocument>& catalog);

enum class AnswerType { kHowTo, kPlace, kGeneral };
std::string_view answer_type_name(AnswerType t);

struct HowToAnswer {
    std::string title;
    std::vector<std::string> steps;
};
struct PlaceAnswer {
    std::string name;
    std::string description;
    std::string why_notable;
};
struct GeneralAnswer {
    std::string text;
};

struct Citation {
    std::string video_id;
    std::string title;
    TimeSpan time_span;
    std::string deep_link_url;
    std::string quoted_text;
    std::string entry_id;  // retrieved entry the citation was checked against
};

extern const char* const kNoResultsText;

struct AnswerPayload {
    std::variant<HowToAnswer, PlaceAnswer, GeneralAnswer> body;
    std::vector<Citation> citations;
    bool no_results = false;

    AnswerType type() const;
    /// Throws Error(kInvalidParams) when a type invariant is broken.
    void validate() const;
    static AnswerPayload none_found();
};

inline constexpr const char* kDefaultDeepLinkTemplate = "{url}{sep}t={seconds}s";

/// Expands {url}, {sep} ("&" when url already has a query, else "?") and
/// {seconds} (floor of start_ms / 1000). Empty url gives an empty link.
std::string deep_link(const std::string& url, std::int64_t start_ms,
                      const std::string& link_template = kDefaultDeepLinkTemplate);

/// Router prompt with LLM, else (or when the LLM fails) max cosine between
/// the query and tool descriptions, ties to the smallest tool_id.
/// Throws Error(kNoTools).
std::string select_tool(const std::string& query, const std::vector<RetrieverTool>& tools,
                        const EmbeddingProvider& embedder, const LlmProvider* router);
/// The embedding-only path of select_tool.
std::string select_tool_by_embedding(const std::string& query, const std::vector<RetrieverTool>& tools,
                                     const EmbeddingProvider& embedder);
LlmRequest router_request(const std::string& query, const std::vector<RetrieverTool>& tools);

struct RagProviders {
    std::shared_ptr<const EmbeddingProvider> embedder;
    std::shared_ptr<const LlmProvider> synthesizer;
    std::shared_ptr<const LlmProvider> router;  // optional
};

struct RagOptions {
    std::size_t default_k = 5;
    std::string deep_link_template = kDefaultDeepLinkTemplate;
};

/// Everything the pipeline saw, for inspection in tests and logs.
struct QueryTrace {
    std::string tool_id;
    std::vector<RetrievalResult> retrieved;
    std::optional<LlmRequest> synthesis_request;
    std::size_t citations_proposed = 0;
    std::size_t citations_dropped = 0;
    bool synthesis_fallback = false;
};

struct QueryResult {
    AnswerPayload payload;
    QueryTrace trace;
};

/// Immutable once built; safe to share between request threads.
class RagEngine {
public:
    /// Throws Error(kDimensionMismatch) when the embedder does not match the
    /// index, Error(kNoTools)/Error(kInvalidParams) for bad tools.
    RagEngine(std::shared_ptr<const VectorIndex> index, DocumentStore::Catalog catalog,
              std::vector<RetrieverTool> tools, RagProviders providers, RagOptions options = {});

    /// Throws Error(kEmptyIndex), Error(kUnknownTool), Error(kInvalidParams),
    /// Error(kProviderError), Error(kFixtureMiss).
    QueryResult answer(const std::string& query, const std::optional<std::string>& tool = std::nullopt,
                       std::optional<std::size_t> k = std::nullopt) const;

    struct Retrieval {
        std::string tool_id;
        std::vector<RetrievalResult> results;
    };
    /// Routing and search only (first two pipeline steps).
    Retrieval retrieve(const std::string& query, const std::optional<std::string>& tool = std::nullopt,
                       std::optional<std::size_t> k = std::nullopt) const;
    LlmRequest synthesis_request(const std::string& query, const std::vector<RetrievalResult>& retrieved) const;

    const VectorIndex& index() const noexcept { return *index_; }
    const DocumentStore& store() const noexcept { return store_; }
    const std::vector<RetrieverTool>& tools() const noexcept { return tools_; }
    const RagOptions& options() const noexcept { return options_; }

    /// Numbered source block shown to the synthesis model.
    std::string render_sources(const std::vector<RetrievalResult>& retrieved) const;

private:
    struct Source;
    Source source_for(const RetrievalResult& r) const;

    std::shared_ptr<const VectorIndex> index_;
    DocumentStore store_;
    std::vector<RetrieverTool> tools_;
    RagProviders providers_;
    RagOptions options_;
};

/// `{answer_type, payload, citations, retrieved, tool, no_results}`.
nlohmann::ordered_json query_result_to_json(const QueryResult& result);

}  // namespace vidrag
