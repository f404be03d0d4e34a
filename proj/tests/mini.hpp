// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

// The bundled mini corpus wired up the way the CLI wires it.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vidrag/catalog.hpp"
#include "vidrag/config.hpp"
#include "vidrag/embedding.hpp"
#include "vidrag/index.hpp"
#include "vidrag/llm.hpp"
#include "vidrag/rag.hpp"

namespace mini {

inline std::string fixture_dir() { return VIDRAG_FIXTURE_DIR; }
inline std::string config_path() { return fixture_dir() + "/mini_config.json"; }

struct Corpus {
    vidrag::RunConfig config;
    std::shared_ptr<const std::vector<vidrag::VideoDocument>> catalog;
    std::shared_ptr<const vidrag::EmbeddingProvider> embedder;
    std::shared_ptr<const vidrag::LlmProvider> llm;  // one scripted fixture serves every slot
};

inline const Corpus& corpus() {
    static const Corpus c = [] {
        Corpus out;
        out.config = vidrag::load_run_config(config_path());
        out.catalog = std::make_shared<const std::vector<vidrag::VideoDocument>>(
            vidrag::load_catalog(out.config.catalog));
        out.embedder = vidrag::make_embedding_provider(out.config.embedding);
        out.llm = vidrag::make_llm_provider(out.config.answer_llm);
        return out;
    }();
    return c;
}

inline std::shared_ptr<const vidrag::VectorIndex> aligned_index() {
    static const auto index = [] {
        const auto& c = corpus();
        vidrag::BuildOptions opt;
        opt.chunking = c.config.chunking;
        return std::make_shared<const vidrag::VectorIndex>(vidrag::build_index(*c.catalog, *c.embedder, opt).index);
    }();
    return index;
}

inline std::shared_ptr<const vidrag::RagEngine> engine(bool with_router = true) {
    const auto& c = corpus();
    vidrag::RagProviders providers{c.embedder, c.llm, with_router ? c.llm : nullptr};
    vidrag::RagOptions options;
    options.default_k = c.config.k;
    options.deep_link_template = c.config.deep_link_template;
    return std::make_shared<const vidrag::RagEngine>(aligned_index(), c.catalog,
                                                     vidrag::tools_from_json(c.config.tools, *c.catalog),
                                                     providers, options);
}

}  // namespace mini
