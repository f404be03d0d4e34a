// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixture_gen.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "vidrag/error.hpp"
#include "vidrag/eval.hpp"
#include "vidrag/hash.hpp"
#include "vidrag/index.hpp"
#include "vidrag/rag.hpp"

namespace vidrag::fixtures {

using json = nlohmann::json;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c); });
    return s;
}

bool mentions(const std::string& text, const std::string& keyword) {
    return lower(text).find(keyword) != std::string::npos;
}

class Sink {
public:
    void add(const LlmRequest& req, const std::string& response) {
        const auto key = prompt_key(req);
        const auto [it, inserted] = lines_.emplace(key, response);
        if (!inserted && it->second != response) {
            throw Error(ErrorCode::kInvalidParams, "conflicting fixture replies for key " + to_hex64(key));
        }
    }
    void add(const LlmRequest& req, const json& response) { add(req, response.dump()); }

    std::string str() const {
        std::string out;
        for (const auto& [key, response] : lines_) {
            nlohmann::ordered_json line{{"key", to_hex64(key)}, {"response", response}};
            out += line.dump() + "\n";
        }
        return out;
    }

private:
    std::map<std::uint64_t, std::string> lines_;
};

// First `n` words of the segment texts; a crude but deterministic summary.
std::string lead_words(const std::vector<std::string>& texts, std::size_t n) {
    std::string out;
    std::size_t count = 0;
    for (const auto& t : texts) {
        std::size_t pos = 0;
        while (count < n && pos < t.size()) {
            const auto start = t.find_first_not_of(' ', pos);
            if (start == std::string::npos) break;
            auto end = t.find(' ', start);
            if (end == std::string::npos) end = t.size();
            if (!out.empty()) out += ' ';
            out += t.substr(start, end - start);
            ++count;
            pos = end;
        }
    }
    return out;
}

std::vector<std::string> context_texts(const VideoDocument& v, FieldVariant variant) {
    std::vector<std::string> out;
    switch (variant) {
        case FieldVariant::kAsr:
            for (const auto& c : v.cues) out.push_back(c.text);
            break;
        case FieldVariant::kVisualCaptions:
            for (const auto& s : v.scenes) out.push_back(s.text);
            break;
        case FieldVariant::kTitleDescription:
            out = {v.title, v.description};
            break;
        default:
            for (const auto& seg : v.transcript().segments) out.push_back(seg.text);
    }
    return out;
}

}  // namespace

Authoring load_authoring(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
    const auto j = json::parse(in);
    Authoring a;
    for (const auto& q : j.at("questions")) {
        a.questions.push_back({q.at("video_id").get<std::string>(), q.at("text").get<std::string>(),
                               lower(q.at("keyword").get<std::string>())});
    }
    for (const auto& q : j.at("queries")) {
        AuthoredQuery aq;
        aq.query = q.at("query").get<std::string>();
        aq.tool = q.at("tool").get<std::string>();
        for (const auto& k : q.at("cite_keywords")) aq.cite_keywords.push_back(lower(k.get<std::string>()));
        aq.hallucinated_citation = q.value("hallucinated_citation", false);
        aq.answer = q.at("answer");
        a.queries.push_back(std::move(aq));
    }
    return a;
}

std::string generate_llm_fixture(const RunConfig& config, const std::vector<VideoDocument>& catalog,
                                 const Authoring& authoring, std::size_t questions_per_video) {
    Sink sink;
    const ScriptedLlmProvider question_llm(config.question_llm, "");
    const ScriptedLlmProvider answer_llm(config.answer_llm, "");

    // Question generation, one reply per video.
    QuestionGenOptions qopts;
    qopts.questions_per_video = questions_per_video;
    qopts.chunking = config.chunking;
    for (const auto& video : catalog) {
        if (video.scenes.empty() && video.cues.empty()) continue;
        json texts = json::array();
        for (const auto& q : authoring.questions) {
            if (q.video_id == video.video_id) texts.push_back(q.text);
        }
        if (texts.empty()) continue;
        sink.add(question_gen_request(video, question_llm, qopts), json{{"questions", texts}});
    }

    // Hit judge over every document text any variant can retrieve.
    const auto embedder = make_embedding_provider(config.embedding);
    const auto shared = std::make_shared<const std::vector<VideoDocument>>(catalog);
    for (auto variant : kAllFieldVariants) {
        BuildOptions build;
        build.variant = variant;
        build.chunking = config.chunking;
        const auto built = build_index(catalog, *embedder, build);
        const DocumentStore store(shared, built.index.meta());
        for (const auto& entry : built.index.entries()) {
            const auto text = store.text_of(entry);
            for (const auto& q : authoring.questions) {
                const GeneratedQuestion gq{"", q.text, q.video_id};
                const bool hit = mentions(text, q.keyword);
                sink.add(hit_judge_request(gq, text),
                         json{{"contains_answer", hit},
                              {"rationale", hit ? "The document mentions " + q.keyword + "."
                                                : "The document does not cover this."}});
            }
        }
    }

    // Answers and quality scores for every question against every video.
    for (const auto& q : authoring.questions) {
        const GeneratedQuestion gq{"", q.text, q.video_id};
        for (const auto& video : catalog) {
            const auto transcript = video.transcript();
            if (transcript.segments.empty()) continue;
            std::string answer = "The transcript does not answer this question.";
            for (const auto& seg : transcript.segments) {
                if (mentions(seg.text, q.keyword)) {
                    answer = "According to the video: " + seg.text;
                    break;
                }
            }
            sink.add(answer_request(gq, video, answer_llm, config.chunking.max_chars), answer);
            const int score = video.video_id == q.video_id ? 8 : (mentions(answer, q.keyword) ? 6 : 2);
            sink.add(quality_judge_request(gq, answer, render(transcript)),
                     json{{"score", score}, {"rationale", score >= 6 ? "Grounded and on topic." : "Does not answer."}});
        }
    }

    // Summaries from each context.
    for (const auto& video : catalog) {
        for (auto variant : {FieldVariant::kAlignedTranscript, FieldVariant::kAsr, FieldVariant::kVisualCaptions,
                             FieldVariant::kTitleDescription}) {
            if (normalize_caption_text(field_text(video, variant)).empty()) continue;
            sink.add(summarize_request(video, variant), lead_words(context_texts(video, variant), 40));
        }
    }

    // Router and synthesis for the authored queries.
    BuildOptions build;
    build.chunking = config.chunking;
    auto index = std::make_shared<const VectorIndex>(build_index(catalog, *embedder, build).index);
    RagProviders providers;
    providers.embedder = embedder;
    providers.synthesizer = std::make_shared<ScriptedLlmProvider>(config.answer_llm, "");
    const RagEngine engine(index, shared, tools_from_json(config.tools, catalog), providers);
    for (const auto& q : authoring.queries) {
        sink.add(router_request(q.query, engine.tools()), json{{"tool", q.tool}});
        const auto retrieval = engine.retrieve(q.query, q.tool, config.k);
        if (retrieval.results.empty()) continue;
        json reply = q.answer;
        reply["citations"] = json::array();
        for (std::size_t i = 0; i < retrieval.results.size(); ++i) {
            const auto& r = retrieval.results[i];
            const auto* c = engine.store().chunk_of(r.entry_id);
            if (!c) continue;
            for (const auto& seg : parse_rendered(c->text).segments) {
                const bool wanted = std::any_of(q.cite_keywords.begin(), q.cite_keywords.end(),
                                                [&](const std::string& k) { return mentions(seg.text, k); });
                if (!wanted) continue;
                reply["citations"].push_back({{"source", i + 1},
                                              {"start", format_timestamp(seg.span.start_ms)},
                                              {"end", format_timestamp(seg.span.end_ms)}});
            }
        }
        if (q.hallucinated_citation) {
            reply["citations"].push_back({{"source", 1}, {"start", "01:00:00.000"}, {"end", "01:00:05.000"}});
        }
        sink.add(engine.synthesis_request(q.query, retrieval.results), reply);
    }
    return sink.str();
}

}  // namespace vidrag::fixtures
