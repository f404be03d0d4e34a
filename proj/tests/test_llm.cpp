// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "mock_server.hpp"
#include "vidrag/error.hpp"
#include "vidrag/hash.hpp"
#include "vidrag/llm.hpp"

using namespace vidrag;
using json = nlohmann::json;

namespace {

LlmRequest req(const std::string& sys, const std::string& user) {
    LlmRequest r;
    r.system_prompt = sys;
    r.user_prompt = user;
    return r;
}

std::string keyed(const LlmRequest& r, const std::string& response) {
    return json{{"key", to_hex64(prompt_key(r))}, {"response", response}}.dump() + "\n";
}

LlmProviderSpec scripted_spec(std::size_t budget = 48000) {
    LlmProviderSpec s;
    s.fixture_path = "inline";
    s.context_budget_chars = budget;
    return s;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return ErrorCode::kEmptyInput;
}

const auto kAcceptAnything = [](const json&) { return true; };

}  // namespace

TEST(PromptKey, SeparatesSystemFromUser) {
    EXPECT_EQ(prompt_key("ab", "c"), stable_hash64(std::string("ab\0c", 4)));
    EXPECT_NE(prompt_key("ab", "c"), prompt_key("a", "bc"));
    EXPECT_EQ(prompt_key(req("s", "u")), prompt_key("s", "u"));
}

TEST(ScriptedLlm, KeyedThenPlayback) {
    const auto a = req("sys", "first"), b = req("sys", "second");
    const std::string fixture = keyed(a, "A") + "\n" + R"({"key":null,"response":"P1"})" "\n" +
                                R"({"response":"P2"})" "\n";
    ScriptedLlmProvider llm(scripted_spec(), fixture);
    EXPECT_EQ(llm.keyed_size(), 1u);
    EXPECT_EQ(llm.complete(a), "A");
    EXPECT_EQ(llm.complete(a), "A");  // keyed entries are reusable
    EXPECT_EQ(llm.complete(b), "P1");
    EXPECT_EQ(llm.complete(b), "P2");
    EXPECT_EQ(code_of([&] { llm.complete(b); }), ErrorCode::kFixtureMiss);
}

TEST(ScriptedLlm, BadFixtureLines) {
    EXPECT_EQ(code_of([] { ScriptedLlmProvider(scripted_spec(), "{\"key\":\"zz\",\"response\":\"x\"}"); }),
              ErrorCode::kSchemaError);
    EXPECT_EQ(code_of([] { ScriptedLlmProvider(scripted_spec(), "{\"response\":3}"); }), ErrorCode::kSchemaError);
    EXPECT_EQ(code_of([] { ScriptedLlmProvider(scripted_spec(), "nope"); }), ErrorCode::kSchemaError);
    auto s = scripted_spec();
    s.fixture_path = "/nonexistent/fixture.jsonl";
    EXPECT_EQ(code_of([&] { ScriptedLlmProvider{s}; }), ErrorCode::kIoError);
}

TEST(LlmProvider, BudgetIsRefusedNotTruncated) {
    const auto r = req("0123456789", "abcdefghij");
    ScriptedLlmProvider exact(scripted_spec(20), keyed(r, "ok"));
    EXPECT_EQ(exact.complete(r), "ok");
    ScriptedLlmProvider tight(scripted_spec(19), keyed(r, "ok"));
    EXPECT_EQ(code_of([&] { tight.complete(r); }), ErrorCode::kPromptTooLong);
    EXPECT_EQ(code_of([&] { exact.complete(req("", "u")); }), ErrorCode::kInvalidParams);
    auto bad = r;
    bad.max_tokens = 0;
    EXPECT_EQ(code_of([&] { exact.complete(bad); }), ErrorCode::kInvalidParams);
}

TEST(CompleteJson, ReasksOnceWithSuffix) {
    auto r = req("judge", "question");
    auto re = r;
    re.user_prompt += kJsonReaskSuffix;
    auto inner = std::make_shared<ScriptedLlmProvider>(scripted_spec(), keyed(r, "not json") + keyed(re, "{\"v\":1}"));
    RecordingLlmProvider rec(inner);
    const auto out = complete_json(rec, r, kAcceptAnything);
    EXPECT_EQ(out["v"], 1);
    const auto calls = rec.calls();
    ASSERT_EQ(calls.size(), 2u);
    EXPECT_EQ(calls[0].request.response_format, ResponseFormat::kJson);
    EXPECT_EQ(calls[1].request.user_prompt, re.user_prompt);
}

TEST(CompleteJson, ValidatorRejectionCountsAsBad) {
    auto r = req("judge", "q");
    auto re = r;
    re.user_prompt += kJsonReaskSuffix;
    ScriptedLlmProvider llm(scripted_spec(), keyed(r, "{\"score\":11}") + keyed(re, "{\"score\":\"x\"}"));
    const auto accept = [](const json& j) { return j.at("score").get<int>() <= 10; };
    EXPECT_EQ(code_of([&] { complete_json(llm, r, accept); }), ErrorCode::kBadJudgeOutput);
}

TEST(CompleteJson, MissingReaskFixtureIsBadOutput) {
    auto r = req("judge", "q");
    ScriptedLlmProvider llm(scripted_spec(), keyed(r, "[1,2]"));
    EXPECT_EQ(code_of([&] { complete_json(llm, r, kAcceptAnything); }), ErrorCode::kBadJudgeOutput);
    // A miss on the first ask is not a format problem.
    EXPECT_EQ(code_of([&] { complete_json(llm, req("judge", "other"), kAcceptAnything); }), ErrorCode::kFixtureMiss);
}

namespace {

LlmProviderSpec remote_spec(const std::string& url) {
    LlmProviderSpec s;
    s.kind = LlmKind::kRemoteChat;
    s.model_name = "mock-chat";
    s.endpoint = url;
    s.api_key = "sk-mock";
    s.retry.max_attempts = 1;
    return s;
}

std::string chat_reply(const std::string& content) {
    json message = {{"role", "assistant"}, {"content", content}};
    json choice = {{"index", 0}, {"message", message}};
    return json{{"choices", json::array({choice})}}.dump();
}

}  // namespace

TEST(RemoteChat, SendsMessagesAndReadsContent) {
    MockServer mock;
    json seen;
    mock.server().Post("/v1/chat/completions", [&](const httplib::Request& r, httplib::Response& res) {
        seen = json::parse(r.body);
        res.set_content(chat_reply("hello"), "application/json");
    });
    mock.start();
    RemoteChatLlmProvider llm(remote_spec(mock.base_url()));
    EXPECT_EQ(llm.complete(req("S", "U")), "hello");
    EXPECT_EQ(seen["model"], "mock-chat");
    EXPECT_EQ(seen["messages"][0]["content"], "S");
    EXPECT_EQ(seen["messages"][1]["role"], "user");
    EXPECT_EQ(seen["temperature"], 0.0);
    EXPECT_FALSE(seen.contains("response_format"));
}

TEST(RemoteChat, JsonModeReasksThenBadFormat) {
    MockServer mock;
    std::vector<std::string> prompts;
    mock.server().Post("/v1/chat/completions", [&](const httplib::Request& r, httplib::Response& res) {
        const auto body = json::parse(r.body);
        EXPECT_EQ(body["response_format"]["type"], "json_object");
        prompts.push_back(body["messages"][1]["content"]);
        res.set_content(chat_reply(prompts.size() == 2 && mock.hits == 0 ? "{\"ok\":true}" : "sorry"),
                        "application/json");
    });
    mock.start();
    RemoteChatLlmProvider llm(remote_spec(mock.base_url()));
    auto r = req("S", "U");
    r.response_format = ResponseFormat::kJson;
    EXPECT_EQ(llm.complete(r), "{\"ok\":true}");
    ASSERT_EQ(prompts.size(), 2u);
    EXPECT_EQ(prompts[1], "U" + std::string(kJsonReaskSuffix));

    mock.hits = 1;
    prompts.clear();
    try {
        llm.complete(r);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kProviderError);
        EXPECT_NE(std::string(e.what()).find("BadFormat"), std::string::npos);
    }
}

TEST(RemoteChat, MalformedEnvelope) {
    MockServer mock;
    mock.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"choices":[]})", "application/json");
    });
    mock.start();
    RemoteChatLlmProvider llm(remote_spec(mock.base_url()));
    EXPECT_EQ(code_of([&] { llm.complete(req("S", "U")); }), ErrorCode::kProviderError);
}

TEST(LlmSpec, FromJsonAndValidation) {
    const auto s = LlmProviderSpec::from_json({{"kind", "REMOTE_CHAT"}, {"endpoint", "http://x/v1"},
                                               {"api_key_env", "K"}, {"context_budget_chars", 100}});
    EXPECT_EQ(s.kind, LlmKind::kRemoteChat);
    EXPECT_EQ(s.context_budget_chars, 100u);
    EXPECT_EQ(s.describe().dump(), R"({"kind":"REMOTE_CHAT","model":"gpt-4o-mini","endpoint":"http://x/v1"})");
    EXPECT_EQ(code_of([] { LlmProviderSpec::from_json({{"kind", "ORACLE"}}); }), ErrorCode::kInvalidParams);
    EXPECT_EQ(code_of([] { make_llm_provider(LlmProviderSpec{}); }), ErrorCode::kInvalidParams);
}
