// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/config.hpp"

#include <cstdlib>
#include <fstream>

#include "vidrag/error.hpp"

namespace vidrag {

using json = nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

LlmProviderSpec llm_from(const json& j, const std::filesystem::path& base) {
    auto spec = LlmProviderSpec::from_json(j);
    if (!spec.fixture_path.empty()) spec.fixture_path = resolve(base, spec.fixture_path.string());
    return spec;
}

}  // namespace

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw Error(ErrorCode::kSchemaError, "config must be a JSON object");
    RunConfig c;
    try {
        if (j.contains("catalog")) c.catalog = resolve(base_dir, j.at("catalog").get<std::string>());
        if (j.contains("index")) c.index = resolve(base_dir, j.at("index").get<std::string>());
        if (j.contains("embedding")) c.embedding = EmbeddingProviderSpec::from_json(j.at("embedding"));
        if (j.contains("answer_llm")) c.answer_llm = llm_from(j.at("answer_llm"), base_dir);
        c.judge_llm = j.contains("judge_llm") ? llm_from(j.at("judge_llm"), base_dir) : c.answer_llm;
        c.question_llm = j.contains("question_llm") ? llm_from(j.at("question_llm"), base_dir) : c.judge_llm;
        if (j.contains("router_llm") && !j.at("router_llm").is_null()) {
            c.router_llm = llm_from(j.at("router_llm"), base_dir);
        }
        if (j.contains("chunking")) {
            const auto& ch = j.at("chunking");
            c.chunking.max_chars = ch.value("max_chars", c.chunking.max_chars);
            c.chunking.overlap_lines = ch.value("overlap_lines", c.chunking.overlap_lines);
        }
        c.k = j.value("k", c.k);
        c.seed = j.value("seed", c.seed);
        c.host = j.value("host", c.host);
        c.port = j.value("port", c.port);
        c.deep_link_template = j.value("deep_link_template", c.deep_link_template);
        if (j.contains("tools")) c.tools = j.at("tools");
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kSchemaError, std::string("config: ") + e.what());
    }
    if (c.k == 0) throw Error(ErrorCode::kSchemaError, "config: k must be at least 1");
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::kSchemaError, "config " + path.string() + ": " + e.what());
    }
    return run_config_from_json(j, path.parent_path());
}

void apply_env(RunConfig& config, const EnvLookup& env) {
    auto get = [&](const char* name) -> std::optional<std::string> {
        const char* v = env(name);
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
    if (config.embedding.kind == EmbeddingKind::kRemote) {
        if (auto url = get("VIDRAG_EMBED_BASE_URL")) config.embedding.endpoint = *url;
        if (auto key = get("VIDRAG_EMBED_API_KEY")) config.embedding.api_key = *key;
        if (config.embedding.api_key_env.empty()) config.embedding.api_key_env = "VIDRAG_EMBED_API_KEY";
    }
    auto apply_llm = [&](LlmProviderSpec& spec) {
        if (spec.kind != LlmKind::kRemoteChat) return;
        if (auto url = get("VIDRAG_LLM_BASE_URL")) spec.endpoint = *url;
        if (auto key = get("VIDRAG_LLM_API_KEY")) spec.api_key = *key;
        if (spec.api_key_env.empty()) spec.api_key_env = "VIDRAG_LLM_API_KEY";
    };
    apply_llm(config.answer_llm);
    apply_llm(config.judge_llm);
    apply_llm(config.question_llm);
    if (config.router_llm) apply_llm(*config.router_llm);
}

void apply_env(RunConfig& config) {
    apply_env(config, [](const char* name) { return std::getenv(name); });
}

}  // namespace vidrag
