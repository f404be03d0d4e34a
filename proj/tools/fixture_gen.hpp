// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

// Builds the keyed SCRIPTED LLM fixture for the bundled mini corpus. The
// replies stand in for a real model: judges answer by keyword lookup, the
// answerer quotes the line holding the keyword, synthesis replies are
// authored and cite the lines that match their cite keywords.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "vidrag/catalog.hpp"
#include "vidrag/config.hpp"

namespace vidrag::fixtures {

struct AuthoredQuestion {
    std::string video_id;
    std::string text;
    std::string keyword;  // lowercase; its presence decides the hit judge
};

struct AuthoredQuery {
    std::string query;
    std::string tool;
    std::vector<std::string> cite_keywords;
    bool hallucinated_citation = false;
    nlohmann::json answer;
};

struct Authoring {
    std::vector<AuthoredQuestion> questions;
    std::vector<AuthoredQuery> queries;
};

Authoring load_authoring(const std::filesystem::path& path);

/// JSON lines sorted by key, one per distinct prompt.
std::string generate_llm_fixture(const RunConfig& config, const std::vector<VideoDocument>& catalog,
                                 const Authoring& authoring, std::size_t questions_per_video = 5);

}  // namespace vidrag::fixtures
