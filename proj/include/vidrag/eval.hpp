// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

// Automatic retrieval evaluation (LLM-judged HIT@K and QUALITY@1) and the
// summary comparison harness.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vidrag/catalog.hpp"
#include "vidrag/embedding.hpp"
#include "vidrag/index.hpp"
#include "vidrag/llm.hpp"

namespace vidrag {

struct GeneratedQuestion {
    std::string question_id;
    std::string text;
    std::string source_video_id;

    friend bool operator==(const GeneratedQuestion&, const GeneratedQuestion&) = default;
};

std::string questions_to_jsonl(const std::vector<GeneratedQuestion>& questions);
/// Throws Error(kSchemaError, line).
std::vector<GeneratedQuestion> parse_questions(std::string_view jsonl);
std::vector<GeneratedQuestion> load_questions(const std::filesystem::path& path);

struct JudgeVerdict {
    std::string question_id;
    std::size_t rank = 1;
    bool contains_answer = false;
    std::string rationale;
};

struct QualityScore {
    std::string question_id;
    int score = 1;
    std::string rationale;
};

struct QuestionGenOptions {
    std::size_t n_videos = 500;
    std::size_t n_questions = 1000;
    std::size_t questions_per_video = 5;
    std::uint64_t seed = 7;
    ChunkParams chunking;  // used when a transcript must be cut to the budget
};

/// Samples videos without replacement, asks the LLM for general knowledge
/// questions per transcript, then samples n_questions from the pool.
/// Throws Error(kInvalidParams), Error(kInsufficientQuestions),
/// Error(kProviderError), Error(kBadJudgeOutput).
std::vector<GeneratedQuestion> generate_questions(const std::vector<VideoDocument>& catalog,
                                                  const LlmProvider& llm, const QuestionGenOptions& options);

/// Prompt text sent for one video; exposed so fixtures can be keyed to it.
LlmRequest question_gen_request(const VideoDocument& video, const LlmProvider& llm,
                                const QuestionGenOptions& options);

/// Deterministic sample of `count` distinct indices from [0, n) driven by
/// mt19937_64 (partial Fisher-Yates), in sampled order.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed);

LlmRequest hit_judge_request(const GeneratedQuestion& question, const std::string& document_text);
/// Throws Error(kBadJudgeOutput) or Error(kProviderError).
JudgeVerdict judge_hit(const GeneratedQuestion& question, const std::string& document_text,
                       const LlmProvider& llm, std::size_t rank = 1);

/// Mean over questions of "some verdict at rank <= k is positive". Each
/// inner list holds verdicts for ranks 1..n in order.
/// Throws Error(kInsufficientDepth) or Error(kInvalidParams) (no questions, k == 0).
double hit_at_k(const std::vector<std::vector<bool>>& verdicts, std::size_t k);

/// Longest prefix of whole chunks (overlap 0) whose "\n"-joined text fits
/// `max_chars`. Returns the prefix text (possibly every chunk).
std::string transcript_prefix(const AlignedTranscript& transcript, std::size_t chunk_chars, std::size_t max_chars);

/// Throws Error(kEmptyTranscript) or Error(kPromptTooLong) when not even
/// the first chunk fits the provider budget.
LlmRequest answer_request(const GeneratedQuestion& question, const VideoDocument& top1, const LlmProvider& llm,
                          std::size_t chunk_chars = ChunkParams{}.max_chars);
std::string answer_question(const GeneratedQuestion& question, const VideoDocument& top1, const LlmProvider& llm,
                            std::size_t chunk_chars = ChunkParams{}.max_chars);

LlmRequest quality_judge_request(const GeneratedQuestion& question, const std::string& answer,
                                 const std::string& reference_context);
/// Scores outside 1..10 are rejected (Error(kBadJudgeOutput)), never clamped.
QualityScore judge_quality(const GeneratedQuestion& question, const std::string& answer,
                           const std::string& reference_context, const LlmProvider& llm);

struct EvalConfig {
    std::shared_ptr<const EmbeddingProvider> embedder;
    FieldVariant variant = FieldVariant::kAlignedTranscript;
};

struct EvalJudges {
    std::shared_ptr<const LlmProvider> hit_judge;
    std::shared_ptr<const LlmProvider> answerer;
    std::shared_ptr<const LlmProvider> quality_judge;
};

struct EvalOptions {
    std::size_t k_max = 10;
    std::vector<std::size_t> report_ks = {1, 5, 10};
    ChunkParams chunking;
    double judge_failure_budget = 0.02;
    std::size_t max_in_flight = 4;
};

struct EvalDetailRow {
    std::string question_id;
    std::string source_video_id;
    std::vector<std::string> retrieved;  // entry ids, rank order
    std::vector<bool> verdicts;
    std::string top1_video_id;
    std::optional<int> quality;
    std::string error;
};

struct EvalReport {
    nlohmann::ordered_json embedding;
    FieldVariant variant = FieldVariant::kAlignedTranscript;
    std::map<std::size_t, double> hit_at;
    double quality_at_1 = 0.0;
    std::size_t n_questions = 0;  // questions that entered the metrics
    std::size_t n_failed = 0;
    std::size_t k_max = 0;
    std::size_t depth = 0;
    std::size_t judge_calls = 0;
    std::size_t judge_failures = 0;
    std::vector<std::string> warnings;
    std::string prompt_version;
    std::vector<EvalDetailRow> details;  // sorted by question_id
};

/// Builds one index per config, retrieves top k_max per question (dedup by
/// video), judges every rank, and scores QUALITY@1 from the top-1 video's
/// aligned transcript whatever variant retrieved it.
/// Throws Error(kJudgeBudgetExceeded) when failed judge calls exceed the budget.
std::vector<EvalReport> run_retrieval_eval(const std::vector<VideoDocument>& catalog,
                                           const std::vector<GeneratedQuestion>& questions,
                                           const std::vector<EvalConfig>& configs, const EvalJudges& judges,
                                           const EvalOptions& options);

nlohmann::ordered_json report_to_json(const std::vector<EvalReport>& reports, bool include_details = true);
/// EMBEDDING | DATABASE | HIT@1 | HIT@5 | HIT@10 | QUALITY@1
std::string render_report_table(const std::vector<EvalReport>& reports);
std::string render_report_csv(const std::vector<EvalReport>& reports);

// Summary comparison.

using SummaryScorer = std::function<double(const std::string& candidate, const std::string& reference)>;

/// Multiset token overlap F1 over lowercase alphanumeric tokens.
double token_f1(const std::string& candidate, const std::string& reference);
SummaryScorer token_f1_scorer();
/// Cosine of the two texts' embeddings, floored at 0.
SummaryScorer embedding_cosine_scorer(std::shared_ptr<const EmbeddingProvider> provider);

/// Throws Error(kEmptyInput) when either text is blank.
double compare_summaries(const std::string& candidate, const std::string& reference, const SummaryScorer& scorer);

LlmRequest summarize_request(const VideoDocument& video, FieldVariant context_variant);
/// TITLE alone is not a summary context. Throws Error(kEmptyContext),
/// Error(kInvalidParams).
std::string summarize_video(const VideoDocument& video, FieldVariant context_variant, const LlmProvider& llm);

struct SummaryRow {
    std::string llm;
    FieldVariant context = FieldVariant::kAsr;
    double mean_score = 0.0;
    std::size_t n_videos = 0;
    std::size_t n_skipped = 0;
};

struct SummaryEvalReport {
    std::string scorer_name;
    std::string reference_llm;
    std::vector<SummaryRow> rows;
    std::string prompt_version;
};

/// Reference summaries come from the aligned transcript; each other context
/// variant is scored against them with `scorer`.
SummaryEvalReport run_summary_eval(const std::vector<VideoDocument>& videos, const LlmProvider& llm,
                                   const SummaryScorer& scorer, const std::string& scorer_name);
nlohmann::ordered_json summary_report_to_json(const SummaryEvalReport& report);
std::string render_summary_table(const SummaryEvalReport& report);

}  // namespace vidrag
