// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "vidrag/http.hpp"

namespace vidrag {

enum class ResponseFormat { kText, kJson };

struct LlmRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    int max_tokens = 1024;
    ResponseFormat response_format = ResponseFormat::kText;

    /// Throws Error(kInvalidParams).
    void validate() const;
};

/// Fixture key: stable_hash64 of system_prompt + '\0' + user_prompt.
std::uint64_t prompt_key(const std::string& system_prompt, const std::string& user_prompt);
std::uint64_t prompt_key(const LlmRequest& request);

enum class LlmKind { kRemoteChat, kScripted };

struct LlmProviderSpec {
    LlmKind kind = LlmKind::kScripted;
    std::string model_name = "scripted";
    std::string endpoint;     // REMOTE_CHAT base URL
    std::string api_key_env;  // REMOTE_CHAT credential env var
    std::string api_key;      // resolved at runtime, never serialized
    std::filesystem::path fixture_path;  // SCRIPTED
    std::size_t context_budget_chars = 48000;
    std::size_t max_in_flight = 4;
    RetryPolicy retry;

    void validate() const;
    nlohmann::ordered_json describe() const;
    static LlmProviderSpec from_json(const nlohmann::json& j);
};

class LlmProvider {
public:
    explicit LlmProvider(LlmProviderSpec spec);
    virtual ~LlmProvider() = default;

    const LlmProviderSpec& spec() const noexcept { return spec_; }

    /// Validates the request and refuses (Error(kPromptTooLong)) when the
    /// prompts exceed the context budget; prompts are never truncated here.
    std::string complete(const LlmRequest& request) const;

protected:
    virtual std::string do_complete(const LlmRequest& request) const = 0;

private:
    LlmProviderSpec spec_;
};

/// Answers from a JSON-lines fixture of `{key, response}`: keyed entries are
/// looked up by prompt_key, `key: null` entries are played back in file
/// order once keyed lookup misses. Throws Error(kFixtureMiss) when both fail.
class ScriptedLlmProvider final : public LlmProvider {
public:
    explicit ScriptedLlmProvider(LlmProviderSpec spec);
    ScriptedLlmProvider(LlmProviderSpec spec, std::string_view fixture_jsonl);

    std::size_t keyed_size() const noexcept { return keyed_.size(); }

protected:
    std::string do_complete(const LlmRequest& request) const override;

private:
    void load(std::string_view fixture_jsonl);

    std::unordered_map<std::uint64_t, std::string> keyed_;
    mutable std::mutex playback_mutex_;
    mutable std::deque<std::string> playback_;
};

/// Chat-completions over HTTP: `POST {endpoint}/chat/completions`. A JSON
/// response_format reply that does not parse is re-requested once, then
/// reported as Error(kProviderError, "BadFormat ...").
class RemoteChatLlmProvider final : public LlmProvider {
public:
    explicit RemoteChatLlmProvider(LlmProviderSpec spec);

protected:
    std::string do_complete(const LlmRequest& request) const override;

private:
    std::string request_once(const LlmRequest& request) const;
};

/// Pass-through that records every request/response pair.
class RecordingLlmProvider final : public LlmProvider {
public:
    struct Call {
        LlmRequest request;
        std::string response;
    };

    explicit RecordingLlmProvider(std::shared_ptr<const LlmProvider> inner);

    std::vector<Call> calls() const;

protected:
    std::string do_complete(const LlmRequest& request) const override;

private:
    std::shared_ptr<const LlmProvider> inner_;
    mutable std::mutex mutex_;
    mutable std::vector<Call> calls_;
};

std::shared_ptr<const LlmProvider> make_llm_provider(const LlmProviderSpec& spec);

/// Appended to the user prompt when a JSON reply fails validation.
extern const char* const kJsonReaskSuffix;

/// Asks for JSON, validates with `accept` (returns false or throws
/// nlohmann::json::exception on bad content), re-asks once with
/// kJsonReaskSuffix, then throws Error(kBadJudgeOutput).
nlohmann::json complete_json(const LlmProvider& llm, LlmRequest request,
                             const std::function<bool(const nlohmann::json&)>& accept);

}  // namespace vidrag
