// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/rag.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "vidrag/error.hpp"
#include "vidrag/prompts.hpp"

namespace vidrag {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const char* const kNoResultsText = "No supporting video found for this question.";

namespace {

bool blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

bool nonblank_string(const json& j, const char* key) {
    const auto it = j.find(key);
    return it != j.end() && it->is_string() && !blank(it->get_ref<const std::string&>());
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
    return s;
}

// Timestamps may come back as "HH:MM:SS.mmm" or as integer milliseconds.
std::int64_t citation_ms(const json& v) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_string()) return parse_timestamp(v.get<std::string>());
    return -1;
}

bool valid_synthesis(const json& j) {
    const auto& type = j.at("answer_type");
    if (!type.is_string()) return false;
    const auto t = type.get<std::string>();
    if (t == "HOW_TO") {
        const auto steps = j.find("steps");
        if (!nonblank_string(j, "title") || steps == j.end() || !steps->is_array() || steps->empty()) return false;
        for (const auto& s : *steps) {
            if (!s.is_string() || blank(s.get_ref<const std::string&>())) return false;
        }
    } else if (t == "PLACE") {
        if (!nonblank_string(j, "name") || !nonblank_string(j, "description") || !nonblank_string(j, "why_notable")) {
            return false;
        }
    } else if (t == "GENERAL") {
        if (!nonblank_string(j, "answer")) return false;
    } else {
        return false;
    }
    const auto c = j.find("citations");
    return c == j.end() || c->is_array();
}

std::variant<HowToAnswer, PlaceAnswer, GeneralAnswer> body_from(const json& j) {
    const auto t = j.at("answer_type").get<std::string>();
    if (t == "HOW_TO") {
        HowToAnswer h{j.at("title").get<std::string>(), {}};
        for (const auto& s : j.at("steps")) h.steps.push_back(s.get<std::string>());
        return h;
    }
    if (t == "PLACE") {
        return PlaceAnswer{j.at("name").get<std::string>(), j.at("description").get<std::string>(),
                           j.at("why_notable").get<std::string>()};
    }
    return GeneralAnswer{j.at("answer").get<std::string>()};
}

}  // namespace

void validate_tools(const std::vector<RetrieverTool>& tools) {
    if (tools.empty()) throw Error(ErrorCode::kNoTools, "no retriever tools registered");
    std::set<std::string> seen;
    for (const auto& t : tools) {
        if (blank(t.tool_id)) throw Error(ErrorCode::kInvalidParams, "tool id must be non-empty");
        if (!seen.insert(t.tool_id).second) throw Error(ErrorCode::kInvalidParams, "duplicate tool id " + t.tool_id);
        if (t.video_ids.empty()) throw Error(ErrorCode::kInvalidParams, "tool " + t.tool_id + " has no videos");
    }
}

std::vector<RetrieverTool> tools_from_json(const json& j, const std::vector<VideoDocument>& catalog) {
    std::vector<RetrieverTool> tools;
    try {
        for (const auto& item : j) {
            RetrieverTool t;
            t.tool_id = item.at("id").get<std::string>();
            t.description = item.value("description", std::string());
            const auto& videos = item.at("videos");
            if (videos.is_string() && videos.get<std::string>() == "*") {
                for (const auto& v : catalog) t.video_ids.push_back(v.video_id);
            } else {
                t.video_ids = videos.get<std::vector<std::string>>();
            }
            tools.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kSchemaError, std::string("bad tool definition: ") + e.what());
    }
    validate_tools(tools);
    return tools;
}

std::string_view answer_type_name(AnswerType t) {
    switch (t) {
        case AnswerType::kHowTo:
            return "HOW_TO";
        case AnswerType::kPlace:
            return "PLACE";
        case AnswerType::kGeneral:
            return "GENERAL";
    }
    return "GENERAL";
}

AnswerType AnswerPayload::type() const {
    return static_cast<AnswerType>(body.index());
}

void AnswerPayload::validate() const {
    if (const auto* h = std::get_if<HowToAnswer>(&body)) {
        if (h->steps.empty()) throw Error(ErrorCode::kInvalidParams, "HOW_TO answer without steps");
    }
    if (!no_results && citations.empty()) {
        throw Error(ErrorCode::kInvalidParams, "answer backed by retrieval carries no citations");
    }
    if (no_results && !citations.empty()) throw Error(ErrorCode::kInvalidParams, "no-result answer with citations");
}

AnswerPayload AnswerPayload::none_found() {
    AnswerPayload p;
    p.body = GeneralAnswer{kNoResultsText};
    p.no_results = true;
    return p;
}

std::string deep_link(const std::string& url, std::int64_t start_ms, const std::string& link_template) {
    if (url.empty()) return {};
    const auto seconds = std::max<std::int64_t>(start_ms, 0) / 1000;
    auto out = replace_all(link_template, "{seconds}", std::to_string(seconds));
    out = replace_all(out, "{sep}", url.find('?') == std::string::npos ? "?" : "&");
    return replace_all(out, "{url}", url);
}

LlmRequest router_request(const std::string& query, const std::vector<RetrieverTool>& tools) {
    std::string listing;
    for (const auto& t : tools) listing += "- " + t.tool_id + ": " + t.description + "\n";
    if (!listing.empty()) listing.pop_back();
    const auto& tmpl = prompt_template("router");
    LlmRequest req;
    req.system_prompt = tmpl.system;
    req.user_prompt = tmpl.render_user({{"tools", listing}, {"query", query}});
    return req;
}

std::string select_tool_by_embedding(const std::string& query, const std::vector<RetrieverTool>& tools,
                                     const EmbeddingProvider& embedder) {
    if (tools.empty()) throw Error(ErrorCode::kNoTools, "no retriever tools registered");
    std::vector<const RetrieverTool*> order;
    for (const auto& t : tools) order.push_back(&t);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->tool_id < b->tool_id; });

    std::vector<std::string> texts{query};
    for (const auto* t : order) texts.push_back(blank(t->description) ? t->tool_id : t->description);
    const auto vectors = embedder.embed_batch(texts);
    std::size_t best = 0;
    double best_score = -2.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto s = cosine(vectors[0], vectors[i + 1]);
        if (s > best_score) {
            best_score = s;
            best = i;
        }
    }
    return order[best]->tool_id;
}

std::string select_tool(const std::string& query, const std::vector<RetrieverTool>& tools,
                        const EmbeddingProvider& embedder, const LlmProvider* router) {
    if (tools.empty()) throw Error(ErrorCode::kNoTools, "no retriever tools registered");
    if (tools.size() == 1) return tools.front().tool_id;
    if (router) {
        try {
            const auto reply = complete_json(*router, router_request(query, tools), [&](const json& j) {
                const auto& id = j.at("tool");
                return id.is_string() && std::any_of(tools.begin(), tools.end(), [&](const RetrieverTool& t) {
                           return t.tool_id == id.get_ref<const std::string&>();
                       });
            });
            return reply.at("tool").get<std::string>();
        } catch (const Error&) {
            // fall through to the deterministic router
        }
    }
    return select_tool_by_embedding(query, tools, embedder);
}

struct RagEngine::Source {
    const VideoDocument* video = nullptr;
    std::string text;          // rendered lines shown to the model
    TimeSpan span;             // what a citation must stay inside
    AlignedTranscript lines;   // parsed back for quoting
};

RagEngine::RagEngine(std::shared_ptr<const VectorIndex> index, DocumentStore::Catalog catalog,
                     std::vector<RetrieverTool> tools, RagProviders providers, RagOptions options)
    : index_(std::move(index)),
      store_(std::move(catalog), index_->meta()),
      tools_(std::move(tools)),
      providers_(std::move(providers)),
      options_(std::move(options)) {
    validate_tools(tools_);
    if (!providers_.embedder || !providers_.synthesizer) {
        throw Error(ErrorCode::kInvalidParams, "an embedder and a synthesis LLM are required");
    }
    if (!index_->empty() && providers_.embedder->dim() != index_->dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "embedder dim " + std::to_string(providers_.embedder->dim()) +
                                                       " vs index dim " + std::to_string(index_->dim()));
    }
    if (options_.default_k == 0) throw Error(ErrorCode::kInvalidParams, "default k must be at least 1");
}

RagEngine::Source RagEngine::source_for(const RetrievalResult& r) const {
    Source s;
    s.video = &store_.video(r.video_id);
    if (const auto* c = store_.chunk_of(r.entry_id)) {
        s.text = c->text;
        s.span = c->time_span;
    } else {
        // Whole-video entry: the full transcript is the citable unit.
        s.text = store_.rendered_transcript(r.video_id);
    }
    s.lines = parse_rendered(s.text, r.video_id);
    if (!store_.chunk_of(r.entry_id) && !s.lines.segments.empty()) {
        s.span = {s.lines.segments.front().span.start_ms, s.lines.segments.front().span.end_ms};
        for (const auto& seg : s.lines.segments) {
            s.span.start_ms = std::min(s.span.start_ms, seg.span.start_ms);
            s.span.end_ms = std::max(s.span.end_ms, seg.span.end_ms);
        }
    }
    return s;
}

std::string RagEngine::render_sources(const std::vector<RetrievalResult>& retrieved) const {
    std::ostringstream out;
    for (std::size_t i = 0; i < retrieved.size(); ++i) {
        const auto s = source_for(retrieved[i]);
        if (i) out << "\n\n";
        out << "[" << (i + 1) << "] " << s.video->title << " (" << s.video->video_id << ")\n" << s.text;
    }
    return out.str();
}

RagEngine::Retrieval RagEngine::retrieve(const std::string& query, const std::optional<std::string>& tool,
                                         std::optional<std::size_t> k) const {
    if (blank(query)) throw Error(ErrorCode::kInvalidParams, "query must be non-empty");
    const auto top_k = k.value_or(options_.default_k);
    if (top_k == 0) throw Error(ErrorCode::kInvalidParams, "k must be at least 1");
    if (index_->empty()) throw Error(ErrorCode::kEmptyIndex, "index has no entries");

    Retrieval out;
    if (tool) {
        const auto it = std::find_if(tools_.begin(), tools_.end(),
                                     [&](const RetrieverTool& t) { return t.tool_id == *tool; });
        if (it == tools_.end()) throw Error(ErrorCode::kUnknownTool, "unknown tool '" + *tool + "'");
        out.tool_id = *tool;
    } else {
        out.tool_id = select_tool(query, tools_, *providers_.embedder, providers_.router.get());
    }
    const auto& chosen = *std::find_if(tools_.begin(), tools_.end(),
                                       [&](const RetrieverTool& t) { return t.tool_id == out.tool_id; });

    SearchOptions search_options;
    search_options.k = top_k;
    search_options.deduplicate_by_video = true;
    search_options.video_mask = index_->video_mask(chosen.video_ids);
    const auto qv = providers_.embedder->embed(query);
    out.results = search(*index_, qv.values, search_options);
    return out;
}

LlmRequest RagEngine::synthesis_request(const std::string& query,
                                        const std::vector<RetrievalResult>& retrieved) const {
    const auto& tmpl = prompt_template("synthesis");
    LlmRequest req;
    req.system_prompt = tmpl.system;
    req.user_prompt = tmpl.render_user({{"query", query}, {"sources", render_sources(retrieved)}});
    return req;
}

QueryResult RagEngine::answer(const std::string& query, const std::optional<std::string>& tool,
                              std::optional<std::size_t> k) const {
    QueryResult result;
    auto& trace = result.trace;
    auto retrieval = retrieve(query, tool, k);
    trace.tool_id = std::move(retrieval.tool_id);
    trace.retrieved = std::move(retrieval.results);
    if (trace.retrieved.empty()) {
        result.payload = AnswerPayload::none_found();
        return result;
    }

    std::vector<Source> sources;
    for (const auto& r : trace.retrieved) sources.push_back(source_for(r));

    const auto req = synthesis_request(query, trace.retrieved);
    trace.synthesis_request = req;

    json reply;
    try {
        reply = complete_json(*providers_.synthesizer, req, valid_synthesis);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::kBadJudgeOutput) throw;
        // Unparseable synthesis: say so and point at every retrieved chunk.
        trace.synthesis_fallback = true;
        result.payload.body = GeneralAnswer{"The assistant could not compose a structured answer. "
                                            "The cited video segments were the closest matches."};
        for (std::size_t i = 0; i < sources.size(); ++i) {
            const auto& s = sources[i];
            result.payload.citations.push_back({s.video->video_id, s.video->title, s.span,
                                                deep_link(s.video->url, s.span.start_ms, options_.deep_link_template),
                                                s.text, trace.retrieved[i].entry_id});
        }
        result.payload.validate();
        return result;
    }

    result.payload.body = body_from(reply);
    std::set<std::tuple<std::string, std::int64_t, std::int64_t>> seen;
    if (const auto c = reply.find("citations"); c != reply.end()) {
        for (const auto& item : *c) {
            ++trace.citations_proposed;
            auto drop = [&] { ++trace.citations_dropped; };
            if (!item.is_object() || !item.contains("source") || !item["source"].is_number_integer()) {
                drop();
                continue;
            }
            const auto n = item["source"].get<std::int64_t>();
            const auto start = citation_ms(item.value("start", json()));
            const auto end = citation_ms(item.value("end", json()));
            if (n < 1 || n > static_cast<std::int64_t>(sources.size()) || start < 0 || end < start) {
                drop();
                continue;
            }
            const auto& s = sources[static_cast<std::size_t>(n - 1)];
            const TimeSpan span{start, end};
            if (!s.span.contains(span)) {
                drop();
                continue;
            }
            std::string quoted;
            for (const auto& seg : s.lines.segments) {
                // Half-open overlap, so a line that only touches the cited span is not quoted.
                const bool overlaps = span.start_ms == span.end_ms
                                          ? seg.span.start_ms <= span.start_ms && span.start_ms <= seg.span.end_ms
                                          : seg.span.start_ms < span.end_ms && seg.span.end_ms > span.start_ms;
                if (!overlaps) continue;
                if (!quoted.empty()) quoted += '\n';
                quoted += render_line(seg);
            }
            if (quoted.empty()) {
                drop();
                continue;
            }
            if (!seen.emplace(s.video->video_id, span.start_ms, span.end_ms).second) continue;
            result.payload.citations.push_back({s.video->video_id, s.video->title, span,
                                                deep_link(s.video->url, span.start_ms, options_.deep_link_template),
                                                std::move(quoted), trace.retrieved[static_cast<std::size_t>(n - 1)].entry_id});
        }
    }
    if (result.payload.citations.empty()) {
        result.payload = AnswerPayload::none_found();
        return result;
    }
    result.payload.validate();
    return result;
}

ojson query_result_to_json(const QueryResult& result) {
    const auto& p = result.payload;
    ojson out;
    out["answer_type"] = answer_type_name(p.type());
    ojson body;
    std::visit(
        [&](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, HowToAnswer>) {
                body["title"] = b.title;
                body["steps"] = b.steps;
            } else if constexpr (std::is_same_v<T, PlaceAnswer>) {
                body["name"] = b.name;
                body["description"] = b.description;
                body["why_notable"] = b.why_notable;
            } else {
                body["answer"] = b.text;
            }
        },
        p.body);
    out["payload"] = std::move(body);
    out["citations"] = ojson::array();
    for (const auto& c : p.citations) {
        out["citations"].push_back({{"video_id", c.video_id},
                                    {"title", c.title},
                                    {"start_ms", c.time_span.start_ms},
                                    {"end_ms", c.time_span.end_ms},
                                    {"deep_link_url", c.deep_link_url},
                                    {"quoted_text", c.quoted_text}});
    }
    out["retrieved"] = ojson::array();
    for (const auto& r : result.trace.retrieved) {
        out["retrieved"].push_back({{"video_id", r.video_id}, {"score", r.score}, {"entry_id", r.entry_id}});
    }
    out["tool"] = result.trace.tool_id;
    out["no_results"] = p.no_results;
    return out;
}

}  // namespace vidrag
