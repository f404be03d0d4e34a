// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/llm.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "vidrag/error.hpp"
#include "vidrag/hash.hpp"

namespace vidrag {

using json = nlohmann::json;

const char* const kJsonReaskSuffix =
    "\n\nYour previous reply was not a valid JSON object in the requested format. "
    "Reply again with only the JSON object.";

namespace {

bool parses_as_json_object(const std::string& text) {
    try {
        return json::parse(text).is_object();
    } catch (const json::parse_error&) {
        return false;
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open fixture " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

void LlmRequest::validate() const {
    if (system_prompt.empty() || user_prompt.empty()) {
        throw Error(ErrorCode::kInvalidParams, "LLM prompts must be non-empty");
    }
    if (temperature < 0.0) throw Error(ErrorCode::kInvalidParams, "temperature must be >= 0");
    if (max_tokens <= 0) throw Error(ErrorCode::kInvalidParams, "max_tokens must be positive");
}

std::uint64_t prompt_key(const std::string& system_prompt, const std::string& user_prompt) {
    std::string joined;
    joined.reserve(system_prompt.size() + user_prompt.size() + 1);
    joined += system_prompt;
    joined += '\0';
    joined += user_prompt;
    return stable_hash64(joined);
}

std::uint64_t prompt_key(const LlmRequest& request) {
    return prompt_key(request.system_prompt, request.user_prompt);
}

void LlmProviderSpec::validate() const {
    if (context_budget_chars == 0) throw Error(ErrorCode::kInvalidParams, "context budget must be positive");
    if (kind == LlmKind::kRemoteChat && (endpoint.empty() || (api_key_env.empty() && api_key.empty()))) {
        throw Error(ErrorCode::kInvalidParams, "REMOTE_CHAT provider needs an endpoint and a credential");
    }
    if (kind == LlmKind::kScripted && fixture_path.empty()) {
        throw Error(ErrorCode::kInvalidParams, "SCRIPTED provider needs a fixture path");
    }
}

nlohmann::ordered_json LlmProviderSpec::describe() const {
    nlohmann::ordered_json j;
    j["kind"] = kind == LlmKind::kRemoteChat ? "REMOTE_CHAT" : "SCRIPTED";
    j["model"] = model_name;
    if (kind == LlmKind::kRemoteChat) {
        j["endpoint"] = endpoint;
    } else {
        j["fixture"] = fixture_path.filename().string();
    }
    return j;
}

LlmProviderSpec LlmProviderSpec::from_json(const json& j) {
    LlmProviderSpec spec;
    const auto kind = j.value("kind", std::string("SCRIPTED"));
    if (kind == "REMOTE_CHAT") {
        spec.kind = LlmKind::kRemoteChat;
        spec.model_name = "gpt-4o-mini";
    } else if (kind == "SCRIPTED") {
        spec.kind = LlmKind::kScripted;
    } else {
        throw Error(ErrorCode::kInvalidParams, "unknown LLM kind '" + kind + "'");
    }
    spec.model_name = j.value("model", spec.model_name);
    spec.endpoint = j.value("endpoint", spec.endpoint);
    spec.api_key_env = j.value("api_key_env", spec.api_key_env);
    spec.fixture_path = j.value("fixture", std::string());
    spec.context_budget_chars = j.value("context_budget_chars", spec.context_budget_chars);
    spec.max_in_flight = j.value("max_in_flight", spec.max_in_flight);
    spec.retry.max_attempts = j.value("max_attempts", spec.retry.max_attempts);
    spec.retry.initial_backoff = std::chrono::milliseconds(j.value("backoff_ms", spec.retry.initial_backoff.count()));
    return spec;
}

LlmProvider::LlmProvider(LlmProviderSpec spec) : spec_(std::move(spec)) {}

std::string LlmProvider::complete(const LlmRequest& request) const {
    request.validate();
    const auto size = request.system_prompt.size() + request.user_prompt.size();
    if (size > spec_.context_budget_chars) {
        throw Error(ErrorCode::kPromptTooLong, std::to_string(size) + " prompt chars exceed the budget of " +
                                                   std::to_string(spec_.context_budget_chars));
    }
    return do_complete(request);
}

ScriptedLlmProvider::ScriptedLlmProvider(LlmProviderSpec spec) : LlmProvider(std::move(spec)) {
    this->spec().validate();
    load(read_file(this->spec().fixture_path));
}

ScriptedLlmProvider::ScriptedLlmProvider(LlmProviderSpec spec, std::string_view fixture_jsonl)
    : LlmProvider(std::move(spec)) {
    load(fixture_jsonl);
}

void ScriptedLlmProvider::load(std::string_view fixture_jsonl) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < fixture_jsonl.size()) {
        ++line_no;
        auto nl = fixture_jsonl.find('\n', pos);
        if (nl == std::string_view::npos) nl = fixture_jsonl.size();
        const auto line = fixture_jsonl.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            const auto entry = json::parse(line);
            const auto& response = entry.at("response");
            if (!response.is_string()) throw Error(ErrorCode::kSchemaError, "response must be a string", line_no);
            const auto key = entry.find("key");
            if (key == entry.end() || key->is_null()) {
                playback_.push_back(response.get<std::string>());
            } else {
                keyed_[std::stoull(key->get<std::string>(), nullptr, 16)] = response.get<std::string>();
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::kSchemaError, "fixture line " + std::to_string(line_no) + ": " + e.what(), line_no);
        } catch (const std::logic_error& e) {
            throw Error(ErrorCode::kSchemaError, "fixture line " + std::to_string(line_no) + ": bad key", line_no);
        }
    }
}

std::string ScriptedLlmProvider::do_complete(const LlmRequest& request) const {
    const auto key = prompt_key(request);
    if (const auto it = keyed_.find(key); it != keyed_.end()) return it->second;
    std::lock_guard<std::mutex> lock(playback_mutex_);
    if (playback_.empty()) {
        throw Error(ErrorCode::kFixtureMiss, "no fixture entry for prompt key " + to_hex64(key));
    }
    auto next = std::move(playback_.front());
    playback_.pop_front();
    return next;
}

RemoteChatLlmProvider::RemoteChatLlmProvider(LlmProviderSpec spec) : LlmProvider(std::move(spec)) {
    this->spec().validate();
}

std::string RemoteChatLlmProvider::request_once(const LlmRequest& request) const {
    json body;
    body["model"] = spec().model_name;
    body["messages"] = json::array({
        {{"role", "system"}, {"content", request.system_prompt}},
        {{"role", "user"}, {"content", request.user_prompt}},
    });
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    if (request.response_format == ResponseFormat::kJson) body["response_format"] = {{"type", "json_object"}};

    std::string key = spec().api_key;
    if (key.empty() && !spec().api_key_env.empty()) {
        if (const char* env = std::getenv(spec().api_key_env.c_str())) key = env;
    }
    const auto raw = post_json(spec().endpoint, "/chat/completions", body.dump(), key, spec().retry);
    try {
        const auto reply = json::parse(raw);
        const auto& content = reply.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw Error(ErrorCode::kProviderError, "chat response content is not a string");
        return content.get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kProviderError, std::string("malformed chat response: ") + e.what());
    }
}

std::string RemoteChatLlmProvider::do_complete(const LlmRequest& request) const {
    auto text = request_once(request);
    if (request.response_format != ResponseFormat::kJson || parses_as_json_object(text)) return text;
    auto retry = request;
    retry.user_prompt += kJsonReaskSuffix;
    text = request_once(retry);
    if (parses_as_json_object(text)) return text;
    throw Error(ErrorCode::kProviderError, "BadFormat: reply is not a JSON object after one re-ask");
}

RecordingLlmProvider::RecordingLlmProvider(std::shared_ptr<const LlmProvider> inner)
    : LlmProvider(inner->spec()), inner_(std::move(inner)) {}

std::vector<RecordingLlmProvider::Call> RecordingLlmProvider::calls() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return calls_;
}

std::string RecordingLlmProvider::do_complete(const LlmRequest& request) const {
    auto response = inner_->complete(request);
    std::lock_guard<std::mutex> lock(mutex_);
    calls_.push_back({request, response});
    return response;
}

std::shared_ptr<const LlmProvider> make_llm_provider(const LlmProviderSpec& spec) {
    if (spec.kind == LlmKind::kRemoteChat) return std::make_shared<RemoteChatLlmProvider>(spec);
    return std::make_shared<ScriptedLlmProvider>(spec);
}

json complete_json(const LlmProvider& llm, LlmRequest request,
                   const std::function<bool(const json&)>& accept) {
    request.response_format = ResponseFormat::kJson;
    auto attempt = [&](const LlmRequest& req) -> std::optional<json> {
        const auto text = llm.complete(req);
        try {
            auto parsed = json::parse(text);
            if (parsed.is_object() && accept(parsed)) return parsed;
        } catch (const json::exception&) {
        }
        return std::nullopt;
    };
    if (auto first = attempt(request)) return *first;
    request.user_prompt += kJsonReaskSuffix;
    try {
        if (auto second = attempt(request)) return *second;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::kFixtureMiss) throw;
    }
    throw Error(ErrorCode::kBadJudgeOutput, "reply failed validation after one re-ask");
}

}  // namespace vidrag
