// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

// Regenerates fixtures/mini_llm.jsonl. Run after editing the corpus, the
// authoring file or any prompt template.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "fixture_gen.hpp"

int main(int argc, char** argv) {
    CLI::App app{"regenerate the SCRIPTED LLM fixture for the mini corpus", "vidrag_make_fixtures"};
    std::string config = "fixtures/mini_config.json";
    std::string authoring = "fixtures/mini_authoring.json";
    std::string out = "fixtures/mini_llm.jsonl";
    app.add_option("--config", config)->capture_default_str();
    app.add_option("--authoring", authoring)->capture_default_str();
    app.add_option("--out", out)->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    try {
        const auto cfg = vidrag::load_run_config(config);
        const auto text = vidrag::fixtures::generate_llm_fixture(cfg, vidrag::load_catalog(cfg.catalog),
                                                                 vidrag::fixtures::load_authoring(authoring));
        std::ofstream(out, std::ios::binary | std::ios::trunc) << text;
        std::cout << "wrote " << out << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
