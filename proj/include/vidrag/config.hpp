// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "json.hpp"
#include "vidrag/embedding.hpp"
#include "vidrag/llm.hpp"
#include "vidrag/transcript.hpp"

namespace vidrag {

/// Settings shared by every subcommand. Precedence is flags > env > file;
/// relative paths in a config file resolve against the file's directory.
struct RunConfig {
    std::filesystem::path catalog;
    std::filesystem::path index = "vidrag.idx";
    EmbeddingProviderSpec embedding;
    LlmProviderSpec answer_llm;
    LlmProviderSpec judge_llm;
    LlmProviderSpec question_llm;
    std::optional<LlmProviderSpec> router_llm;
    ChunkParams chunking;
    std::size_t k = 5;
    std::uint64_t seed = 7;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string deep_link_template = "{url}{sep}t={seconds}s";
    nlohmann::json tools = nlohmann::json::array();  // resolved against the catalog later
};

/// Throws Error(kSchemaError) on unknown types or malformed values.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
/// Throws Error(kIoError) or Error(kSchemaError).
RunConfig load_run_config(const std::filesystem::path& path);

using EnvLookup = std::function<const char*(const char*)>;
/// VIDRAG_EMBED_API_KEY / VIDRAG_EMBED_BASE_URL feed REMOTE embedding,
/// VIDRAG_LLM_API_KEY / VIDRAG_LLM_BASE_URL every REMOTE_CHAT slot.
void apply_env(RunConfig& config, const EnvLookup& env);
void apply_env(RunConfig& config);

}  // namespace vidrag
