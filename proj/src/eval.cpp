// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "parallel.hpp"
#include "vidrag/error.hpp"
#include "vidrag/prompts.hpp"

namespace vidrag {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

bool blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

LlmRequest make_request(const PromptTemplate& t, const std::map<std::string, std::string>& values) {
    LlmRequest req;
    req.system_prompt = t.system;
    req.user_prompt = t.render_user(values);
    return req;
}

// Chars left for one placeholder once the rest of the prompt is counted.
std::size_t room_for(const PromptTemplate& t, std::map<std::string, std::string> values, const std::string& slot,
                     std::size_t budget) {
    values[slot] = "";
    const auto overhead = t.system.size() + t.render_user(values).size();
    return budget > overhead ? budget - overhead : 0;
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string question_id_for(std::size_t ordinal) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "q%04zu", ordinal);
    return buf;
}

}  // namespace

std::string questions_to_jsonl(const std::vector<GeneratedQuestion>& questions) {
    std::string out;
    for (const auto& q : questions) {
        ojson j;
        j["question_id"] = q.question_id;
        j["text"] = q.text;
        j["source_video_id"] = q.source_video_id;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<GeneratedQuestion> parse_questions(std::string_view jsonl) {
    std::vector<GeneratedQuestion> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        ++line_no;
        auto nl = jsonl.find('\n', pos);
        if (nl == std::string_view::npos) nl = jsonl.size();
        const auto line = jsonl.substr(pos, nl - pos);
        pos = nl + 1;
        if (blank(line)) continue;
        try {
            const auto j = json::parse(line);
            GeneratedQuestion q{j.at("question_id").get<std::string>(), j.at("text").get<std::string>(),
                                j.at("source_video_id").get<std::string>()};
            if (blank(q.text)) throw Error(ErrorCode::kSchemaError, "empty question text", line_no);
            out.push_back(std::move(q));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::kSchemaError, "questions line " + std::to_string(line_no) + ": " + e.what(),
                        line_no);
        }
    }
    return out;
}

std::vector<GeneratedQuestion> load_questions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open questions file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_questions(buffer.str());
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed) {
    if (count > n) throw Error(ErrorCode::kInvalidParams, "cannot sample " + std::to_string(count) + " of " + std::to_string(n));
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

std::string transcript_prefix(const AlignedTranscript& transcript, std::size_t chunk_chars, std::size_t max_chars) {
    std::string out;
    for (const auto& c : chunk(transcript, ChunkParams{chunk_chars, 0})) {
        const auto next = out.size() + (out.empty() ? 0 : 1) + c.text.size();
        if (next > max_chars) break;
        if (!out.empty()) out += '\n';
        out += c.text;
    }
    return out;
}

LlmRequest question_gen_request(const VideoDocument& video, const LlmProvider& llm,
                                const QuestionGenOptions& options) {
    const auto& t = prompt_template("question_gen");
    std::map<std::string, std::string> values{{"count", std::to_string(options.questions_per_video)}};
    const auto room = room_for(t, values, "transcript", llm.spec().context_budget_chars);
    values["transcript"] = transcript_prefix(video.transcript(), options.chunking.max_chars, room);
    if (values["transcript"].empty()) {
        throw Error(ErrorCode::kPromptTooLong, "transcript of " + video.video_id + " does not fit the context budget");
    }
    return make_request(t, values);
}

std::vector<GeneratedQuestion> generate_questions(const std::vector<VideoDocument>& catalog, const LlmProvider& llm,
                                                  const QuestionGenOptions& options) {
    if (options.n_videos == 0 || options.n_videos > catalog.size()) {
        throw Error(ErrorCode::kInvalidParams, "n_videos must be in 1.." + std::to_string(catalog.size()));
    }
    if (options.n_questions == 0) throw Error(ErrorCode::kInvalidParams, "n_questions must be positive");

    const auto picks = sample_indices(catalog.size(), options.n_videos, options.seed);
    std::vector<std::vector<std::string>> per_video(picks.size());
    std::vector<std::string> errors(picks.size());
    std::vector<std::optional<Error>> failures(picks.size());
    detail::for_each_bounded(picks.size(), llm.spec().max_in_flight, [&](std::size_t i) {
        const auto& video = catalog[picks[i]];
        if (video.scenes.empty() && video.cues.empty()) return;
        try {
            const auto reply = complete_json(llm, question_gen_request(video, llm, options), [](const json& j) {
                const auto& qs = j.at("questions");
                return qs.is_array() && !qs.empty() &&
                       std::all_of(qs.begin(), qs.end(), [](const json& q) { return q.is_string(); });
            });
            for (const auto& q : reply.at("questions")) {
                auto text = normalize_caption_text(q.get<std::string>());
                if (!text.empty()) per_video[i].push_back(std::move(text));
            }
        } catch (const Error& e) {
            failures[i] = e;
        }
    });
    for (const auto& f : failures) {
        if (f) throw *f;
    }

    std::vector<GeneratedQuestion> pool;
    for (std::size_t i = 0; i < picks.size(); ++i) {
        for (auto& text : per_video[i]) pool.push_back({"", std::move(text), catalog[picks[i]].video_id});
    }
    if (pool.size() < options.n_questions) {
        throw Error(ErrorCode::kInsufficientQuestions, "pool has " + std::to_string(pool.size()) + " questions, need " +
                                                           std::to_string(options.n_questions));
    }
    const auto chosen = sample_indices(pool.size(), options.n_questions, options.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<GeneratedQuestion> out;
    out.reserve(chosen.size());
    for (auto idx : chosen) {
        auto q = pool[idx];
        q.question_id = question_id_for(out.size() + 1);
        out.push_back(std::move(q));
    }
    return out;
}

LlmRequest hit_judge_request(const GeneratedQuestion& question, const std::string& document_text) {
    return make_request(prompt_template("hit_judge"), {{"question", question.text}, {"document", document_text}});
}

JudgeVerdict judge_hit(const GeneratedQuestion& question, const std::string& document_text, const LlmProvider& llm,
                       std::size_t rank) {
    if (blank(question.text) || blank(document_text)) {
        throw Error(ErrorCode::kInvalidParams, "judge_hit needs a question and a document");
    }
    const auto reply = complete_json(llm, hit_judge_request(question, document_text), [](const json& j) {
        const auto r = j.find("rationale");
        return j.at("contains_answer").is_boolean() && (r == j.end() || r->is_string());
    });
    return {question.question_id, rank, reply.at("contains_answer").get<bool>(), reply.value("rationale", "")};
}

double hit_at_k(const std::vector<std::vector<bool>>& verdicts, std::size_t k) {
    if (k == 0) throw Error(ErrorCode::kInvalidParams, "k must be at least 1");
    if (verdicts.empty()) throw Error(ErrorCode::kInvalidParams, "no questions to score");
    std::size_t hits = 0;
    for (std::size_t q = 0; q < verdicts.size(); ++q) {
        const auto& row = verdicts[q];
        if (row.size() < k) {
            throw Error(ErrorCode::kInsufficientDepth, "question " + std::to_string(q) + " judged to depth " +
                                                           std::to_string(row.size()) + " < " + std::to_string(k), q);
        }
        if (std::any_of(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), [](bool b) { return b; })) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(verdicts.size());
}

LlmRequest answer_request(const GeneratedQuestion& question, const VideoDocument& top1, const LlmProvider& llm,
                          std::size_t chunk_chars) {
    const auto transcript = top1.transcript();
    if (transcript.segments.empty()) {
        throw Error(ErrorCode::kEmptyTranscript, "video " + top1.video_id + " has no aligned transcript");
    }
    const auto& t = prompt_template("answer");
    std::map<std::string, std::string> values{{"question", question.text}};
    const auto room = room_for(t, values, "transcript", llm.spec().context_budget_chars);
    values["transcript"] = transcript_prefix(transcript, chunk_chars, room);
    if (values["transcript"].empty()) {
        throw Error(ErrorCode::kPromptTooLong, "no transcript chunk of " + top1.video_id + " fits the context budget");
    }
    return make_request(t, values);
}

std::string answer_question(const GeneratedQuestion& question, const VideoDocument& top1, const LlmProvider& llm,
                            std::size_t chunk_chars) {
    return llm.complete(answer_request(question, top1, llm, chunk_chars));
}

LlmRequest quality_judge_request(const GeneratedQuestion& question, const std::string& answer,
                                 const std::string& reference_context) {
    return make_request(prompt_template("quality_judge"),
                        {{"question", question.text}, {"answer", answer}, {"context", reference_context}});
}

QualityScore judge_quality(const GeneratedQuestion& question, const std::string& answer,
                           const std::string& reference_context, const LlmProvider& llm) {
    if (blank(question.text) || blank(answer)) {
        throw Error(ErrorCode::kInvalidParams, "judge_quality needs a question and an answer");
    }
    const auto reply =
        complete_json(llm, quality_judge_request(question, answer, reference_context), [](const json& j) {
            const auto& s = j.at("score");
            const auto r = j.find("rationale");
            if (!s.is_number_integer() || (r != j.end() && !r->is_string())) return false;
            const auto v = s.get<std::int64_t>();
            return v >= 1 && v <= 10;
        });
    return {question.question_id, reply.at("score").get<int>(), reply.value("rationale", "")};
}

std::vector<EvalReport> run_retrieval_eval(const std::vector<VideoDocument>& catalog,
                                           const std::vector<GeneratedQuestion>& questions,
                                           const std::vector<EvalConfig>& configs, const EvalJudges& judges,
                                           const EvalOptions& options) {
    if (questions.empty()) throw Error(ErrorCode::kInvalidParams, "no questions to evaluate");
    if (options.k_max == 0) throw Error(ErrorCode::kInvalidParams, "k_max must be at least 1");
    if (!judges.hit_judge || !judges.answerer || !judges.quality_judge) {
        throw Error(ErrorCode::kInvalidParams, "hit judge, answerer and quality judge are all required");
    }
    const auto shared_catalog = std::make_shared<const std::vector<VideoDocument>>(catalog);
    std::vector<std::string> question_texts;
    for (const auto& q : questions) question_texts.push_back(q.text);
    const auto version = prompt_set_version();

    std::vector<EvalReport> reports;
    for (const auto& config : configs) {
        if (!config.embedder) throw Error(ErrorCode::kInvalidParams, "eval config without an embedder");
        BuildOptions build;
        build.variant = config.variant;
        build.chunking = options.chunking;
        const auto built = build_index(catalog, *config.embedder, build);
        const auto& index = built.index;
        const DocumentStore store(shared_catalog, index.meta());

        EvalReport report;
        report.embedding = config.embedder->spec().describe();
        report.variant = config.variant;
        report.k_max = options.k_max;
        report.depth = std::min(options.k_max, index.video_count());
        report.prompt_version = version;
        if (!built.skipped_video_ids.empty()) {
            report.warnings.push_back(std::to_string(built.skipped_video_ids.size()) +
                                      " videos have no text for this variant and were not indexed");
        }
        if (report.depth < options.k_max) {
            report.warnings.push_back("corpus depth " + std::to_string(report.depth) + " < k_max " +
                                      std::to_string(options.k_max) + "; deeper HIT@K use depth " +
                                      std::to_string(report.depth));
        }

        const auto query_vectors = config.embedder->embed_batch(question_texts);
        SearchOptions search_options;
        search_options.k = options.k_max;
        search_options.deduplicate_by_video = true;

        const auto n = questions.size();
        std::vector<std::vector<RetrievalResult>> retrieved(n);
        for (std::size_t q = 0; q < n; ++q) retrieved[q] = search(index, query_vectors[q].values, search_options);

        struct HitItem {
            std::size_t question;
            std::size_t rank;
        };
        std::vector<HitItem> items;
        for (std::size_t q = 0; q < n; ++q) {
            for (std::size_t r = 0; r < retrieved[q].size(); ++r) items.push_back({q, r});
        }
        std::vector<std::optional<bool>> verdicts(items.size());
        std::vector<std::string> item_errors(items.size());
        detail::for_each_bounded(items.size(), options.max_in_flight, [&](std::size_t i) {
            const auto& item = items[i];
            try {
                const auto& result = retrieved[item.question][item.rank];
                verdicts[i] = judge_hit(questions[item.question], store.text_of(result), *judges.hit_judge,
                                        item.rank + 1)
                                  .contains_answer;
            } catch (const std::exception& e) {
                item_errors[i] = e.what();
            }
        });

        std::vector<std::optional<int>> quality(n);
        std::vector<std::string> quality_errors(n);
        std::vector<std::size_t> quality_calls(n, 0);
        detail::for_each_bounded(n, options.max_in_flight, [&](std::size_t q) {
            if (retrieved[q].empty()) return;
            try {
                const auto& top1 = store.video(retrieved[q].front().video_id);
                quality_calls[q] = 1;
                const auto answer = answer_question(questions[q], top1, *judges.answerer, options.chunking.max_chars);
                quality_calls[q] = 2;
                quality[q] = judge_quality(questions[q], answer, store.rendered_transcript(top1.video_id),
                                           *judges.quality_judge)
                                 .score;
            } catch (const std::exception& e) {
                quality_errors[q] = e.what();
            }
        });

        std::vector<EvalDetailRow> rows(n);
        for (std::size_t q = 0; q < n; ++q) {
            auto& row = rows[q];
            row.question_id = questions[q].question_id;
            row.source_video_id = questions[q].source_video_id;
            for (const auto& r : retrieved[q]) row.retrieved.push_back(r.entry_id);
            if (!retrieved[q].empty()) row.top1_video_id = retrieved[q].front().video_id;
            row.quality = quality[q];
            row.error = quality_errors[q];
            report.judge_calls += quality_calls[q];
            if (!quality_errors[q].empty()) ++report.judge_failures;
        }
        for (std::size_t i = 0; i < items.size(); ++i) {
            auto& row = rows[items[i].question];
            ++report.judge_calls;
            if (verdicts[i]) {
                row.verdicts.push_back(*verdicts[i]);
            } else {
                ++report.judge_failures;
                if (row.error.empty()) row.error = item_errors[i];
            }
        }
        if (static_cast<double>(report.judge_failures) >
            options.judge_failure_budget * static_cast<double>(report.judge_calls)) {
            throw Error(ErrorCode::kJudgeBudgetExceeded,
                        std::to_string(report.judge_failures) + " of " + std::to_string(report.judge_calls) +
                            " judge calls failed for variant " + std::string(field_variant_name(config.variant)));
        }

        std::sort(rows.begin(), rows.end(),
                  [](const EvalDetailRow& a, const EvalDetailRow& b) { return a.question_id < b.question_id; });
        std::vector<std::vector<bool>> scored;
        double quality_sum = 0.0;
        for (const auto& row : rows) {
            if (!row.error.empty() || !row.quality || row.verdicts.size() != report.depth) {
                ++report.n_failed;
                continue;
            }
            scored.push_back(row.verdicts);
            quality_sum += *row.quality;
        }
        report.n_questions = scored.size();
        if (scored.empty()) {
            throw Error(ErrorCode::kJudgeBudgetExceeded, "no question completed judging for variant " +
                                                             std::string(field_variant_name(config.variant)));
        }
        for (auto k : options.report_ks) {
            report.hit_at[k] = hit_at_k(scored, std::min(k, report.depth));
        }
        report.quality_at_1 = quality_sum / static_cast<double>(scored.size());
        report.details = std::move(rows);
        reports.push_back(std::move(report));
    }
    return reports;
}

ojson report_to_json(const std::vector<EvalReport>& reports, bool include_details) {
    ojson out;
    out["prompt_version"] = reports.empty() ? prompt_set_version() : reports.front().prompt_version;
    out["reports"] = ojson::array();
    for (const auto& r : reports) {
        ojson j;
        j["embedding"] = r.embedding;
        j["database"] = field_variant_name(r.variant);
        j["hit_at"] = ojson::object();
        for (const auto& [k, v] : r.hit_at) j["hit_at"][std::to_string(k)] = v;
        j["quality_at_1"] = r.quality_at_1;
        j["n_questions"] = r.n_questions;
        j["n_failed"] = r.n_failed;
        j["k_max"] = r.k_max;
        j["depth"] = r.depth;
        j["judge_calls"] = r.judge_calls;
        j["judge_failures"] = r.judge_failures;
        j["warnings"] = r.warnings;
        if (include_details) {
            j["details"] = ojson::array();
            for (const auto& d : r.details) {
                ojson row;
                row["question_id"] = d.question_id;
                row["source_video_id"] = d.source_video_id;
                row["retrieved"] = d.retrieved;
                row["verdicts"] = d.verdicts;
                row["top1_video_id"] = d.top1_video_id;
                row["quality"] = d.quality ? ojson(*d.quality) : ojson(nullptr);
                if (!d.error.empty()) row["error"] = d.error;
                j["details"].push_back(std::move(row));
            }
        }
        out["reports"].push_back(std::move(j));
    }
    return out;
}

namespace {

std::vector<std::size_t> all_ks(const std::vector<EvalReport>& reports) {
    std::set<std::size_t> ks;
    for (const auto& r : reports) {
        for (const auto& [k, _] : r.hit_at) ks.insert(k);
    }
    return {ks.begin(), ks.end()};
}

std::string model_of(const EvalReport& r) {
    return r.embedding.contains("model") ? r.embedding["model"].get<std::string>() : "?";
}

}  // namespace

std::string render_report_table(const std::vector<EvalReport>& reports) {
    const auto ks = all_ks(reports);
    std::size_t w_model = 9, w_db = 8;
    for (const auto& r : reports) {
        w_model = std::max(w_model, model_of(r).size());
        w_db = std::max(w_db, field_variant_label(r.variant).size());
    }
    std::ostringstream out;
    auto cell = [&](const std::string& s, std::size_t w) {
        out << s << std::string(w > s.size() ? w - s.size() : 0, ' ') << "  ";
    };
    cell("EMBEDDING", w_model);
    cell("DATABASE", w_db);
    for (auto k : ks) cell("HIT@" + std::to_string(k), 6);
    out << "QUALITY@1\n";
    for (const auto& r : reports) {
        cell(model_of(r), w_model);
        cell(std::string(field_variant_label(r.variant)), w_db);
        for (auto k : ks) cell(r.hit_at.count(k) ? fmt3(r.hit_at.at(k)) : "-", 6);
        out << fmt3(r.quality_at_1) << '\n';
    }
    for (const auto& r : reports) {
        for (const auto& w : r.warnings) out << "warning [" << field_variant_name(r.variant) << "]: " << w << '\n';
    }
    return out.str();
}

std::string render_report_csv(const std::vector<EvalReport>& reports) {
    const auto ks = all_ks(reports);
    std::ostringstream out;
    out << "embedding,database";
    for (auto k : ks) out << ",hit@" << k;
    out << ",quality@1,n_questions\n";
    for (const auto& r : reports) {
        out << model_of(r) << ',' << field_variant_name(r.variant);
        for (auto k : ks) out << ',' << (r.hit_at.count(k) ? fmt3(r.hit_at.at(k)) : "");
        out << ',' << fmt3(r.quality_at_1) << ',' << r.n_questions << '\n';
    }
    return out.str();
}

namespace {

std::vector<std::string> tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char raw : text) {
        auto c = static_cast<unsigned char>(raw);
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80) {
            cur.push_back(static_cast<char>(c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace

double token_f1(const std::string& candidate, const std::string& reference) {
    const auto cand = tokens(candidate);
    const auto ref = tokens(reference);
    if (cand.empty() || ref.empty()) return 0.0;
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& t : ref) ++counts[t];
    std::size_t overlap = 0;
    for (const auto& t : cand) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double p = static_cast<double>(overlap) / static_cast<double>(cand.size());
    const double r = static_cast<double>(overlap) / static_cast<double>(ref.size());
    return 2.0 * p * r / (p + r);
}

SummaryScorer token_f1_scorer() { return token_f1; }

SummaryScorer embedding_cosine_scorer(std::shared_ptr<const EmbeddingProvider> provider) {
    return [provider = std::move(provider)](const std::string& candidate, const std::string& reference) {
        const auto vectors = provider->embed_batch({candidate, reference});
        return std::max(0.0, cosine(vectors[0], vectors[1]));
    };
}

double compare_summaries(const std::string& candidate, const std::string& reference, const SummaryScorer& scorer) {
    if (blank(candidate) || blank(reference)) throw Error(ErrorCode::kEmptyInput, "summary text is empty");
    return scorer(candidate, reference);
}

LlmRequest summarize_request(const VideoDocument& video, FieldVariant context_variant) {
    if (context_variant == FieldVariant::kTitle) {
        throw Error(ErrorCode::kInvalidParams, "TITLE is not a summary context");
    }
    auto context = field_text(video, context_variant);
    if (normalize_caption_text(context).empty()) {
        throw Error(ErrorCode::kEmptyContext, std::string(field_variant_name(context_variant)) + " text of " +
                                                  video.video_id + " is empty");
    }
    return make_request(prompt_template("summarize"),
                        {{"context_label", std::string(field_variant_label(context_variant))}, {"context", context}});
}

std::string summarize_video(const VideoDocument& video, FieldVariant context_variant, const LlmProvider& llm) {
    return llm.complete(summarize_request(video, context_variant));
}

SummaryEvalReport run_summary_eval(const std::vector<VideoDocument>& videos, const LlmProvider& llm,
                                   const SummaryScorer& scorer, const std::string& scorer_name) {
    constexpr FieldVariant kCandidates[] = {FieldVariant::kAsr, FieldVariant::kVisualCaptions,
                                            FieldVariant::kTitleDescription};
    constexpr std::size_t kN = std::size(kCandidates);
    struct PerVideo {
        bool has_reference = false;
        std::optional<double> scores[kN];
        std::optional<Error> failure;
    };
    std::vector<PerVideo> results(videos.size());
    detail::for_each_bounded(videos.size(), llm.spec().max_in_flight, [&](std::size_t v) {
        auto& out = results[v];
        try {
            std::string reference;
            try {
                reference = summarize_video(videos[v], FieldVariant::kAlignedTranscript, llm);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::kEmptyContext) return;
                throw;
            }
            out.has_reference = true;
            for (std::size_t c = 0; c < kN; ++c) {
                try {
                    const auto candidate = summarize_video(videos[v], kCandidates[c], llm);
                    out.scores[c] = compare_summaries(candidate, reference, scorer);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::kEmptyContext && e.code() != ErrorCode::kEmptyInput) throw;
                }
            }
        } catch (const Error& e) {
            out.failure = e;
        }
    });
    for (const auto& r : results) {
        if (r.failure) throw *r.failure;
    }

    SummaryEvalReport report;
    report.scorer_name = scorer_name;
    report.reference_llm = llm.spec().model_name;
    report.prompt_version = prompt_set_version();
    for (std::size_t c = 0; c < kN; ++c) {
        SummaryRow row;
        row.llm = llm.spec().model_name;
        row.context = kCandidates[c];
        double sum = 0.0;
        for (const auto& r : results) {
            if (!r.has_reference) continue;
            if (r.scores[c]) {
                sum += *r.scores[c];
                ++row.n_videos;
            } else {
                ++row.n_skipped;
            }
        }
        row.mean_score = row.n_videos ? sum / static_cast<double>(row.n_videos) : 0.0;
        report.rows.push_back(row);
    }
    return report;
}

ojson summary_report_to_json(const SummaryEvalReport& report) {
    ojson out;
    out["prompt_version"] = report.prompt_version;
    out["scorer"] = report.scorer_name;
    out["reference"] = {{"llm", report.reference_llm}, {"context", "ALIGNED_TRANSCRIPT"}};
    out["rows"] = ojson::array();
    for (const auto& r : report.rows) {
        out["rows"].push_back({{"llm", r.llm},
                               {"prompt_context", field_variant_name(r.context)},
                               {"score", r.mean_score},
                               {"n_videos", r.n_videos},
                               {"n_skipped", r.n_skipped}});
    }
    return out;
}

std::string render_summary_table(const SummaryEvalReport& report) {
    std::size_t w_llm = 3;
    for (const auto& r : report.rows) w_llm = std::max(w_llm, r.llm.size());
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-*s  %-20s  %s\n", static_cast<int>(w_llm), "LLM", "PROMPT CONTEXT",
                  report.scorer_name.c_str());
    out << buf;
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof(buf), "%-*s  %-20s  %s\n", static_cast<int>(w_llm), r.llm.c_str(),
                      std::string(field_variant_label(r.context)).c_str(), fmt3(r.mean_score).c_str());
        out << buf;
    }
    out << "reference: " << report.reference_llm << " over Aligned Transcript\n";
    return out.str();
}

}  // namespace vidrag
