// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vidrag/catalog.hpp"
#include "vidrag/config.hpp"
#include "vidrag/error.hpp"
#include "vidrag/eval.hpp"
#include "vidrag/index.hpp"
#include "vidrag/rag.hpp"
#include "vidrag/server.hpp"
#include "vidrag/subtitles.hpp"

namespace vidrag {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool json = false;

    std::string catalog;
    std::string subtitles_dir;
    std::string index;
    std::string out;
    bool stats = false;

    std::string variant = "ALIGNED_TRANSCRIPT";
    std::optional<std::size_t> max_chars;
    std::optional<std::size_t> overlap;

    std::string query;
    std::string tool;
    std::optional<std::size_t> k;

    std::optional<std::size_t> n_videos;
    std::size_t n_questions = 1000;
    std::size_t per_video = 5;

    std::string questions;
    std::vector<std::string> variants;
    std::size_t k_max = 10;
    std::string scorer = "token-f1";

    std::string host;
    std::optional<int> port;
};

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

std::string safe_file_stem(const std::string& id) {
    std::string out = id;
    for (auto& c : out) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        if (!ok) c = '_';
    }
    return out;
}

// Videos without cues pick up <dir>/<video_id>.srt or .vtt when present.
std::size_t attach_subtitles(std::vector<VideoDocument>& catalog, const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::kIoError, "not a directory: " + dir.string());
    std::size_t attached = 0;
    for (auto& video : catalog) {
        if (!video.cues.empty()) continue;
        for (const char* ext : {".srt", ".vtt"}) {
            const auto path = dir / (safe_file_stem(video.video_id) + ext);
            if (!fs::exists(path)) continue;
            auto cues = parse_subtitles(read_text(path));
            std::stable_sort(cues.begin(), cues.end(),
                             [](const SubtitleCue& a, const SubtitleCue& b) { return a.span < b.span; });
            video.cues = std::move(cues);
            ++attached;
            break;
        }
    }
    return attached;
}

class Runner {
public:
    Runner(const Flags& flags, std::ostream& out, std::ostream& err) : f_(flags), out_(out), err_(err) {
        config_ = f_.config.empty() ? RunConfig{} : load_run_config(f_.config);
        apply_env(config_);
        if (f_.seed) config_.seed = *f_.seed;
        if (!f_.catalog.empty()) config_.catalog = f_.catalog;
        if (!f_.index.empty()) config_.index = f_.index;
        if (f_.max_chars) config_.chunking.max_chars = *f_.max_chars;
        if (f_.overlap) config_.chunking.overlap_lines = *f_.overlap;
        if (f_.k) config_.k = *f_.k;
        if (!f_.host.empty()) config_.host = f_.host;
        if (f_.port) config_.port = *f_.port;
    }

    void ingest() {
        auto catalog = load();
        if (!f_.out.empty()) {
            std::string text;
            for (const auto& v : catalog) text += catalog_line(v) + "\n";
            write_text(f_.out, text);
        }
        if (f_.stats) {
            const auto stats = corpus_stats(catalog);
            out_ << (f_.json ? stats_to_json(stats).dump(2) + "\n" : render_stats_table(stats));
        } else if (f_.json) {
            out_ << ojson{{"videos", catalog.size()}, {"valid", true}}.dump(2) << "\n";
        } else {
            out_ << catalog.size() << " videos validated\n";
        }
    }

    void align_all() {
        const auto catalog = load();
        const fs::path dir = f_.out;
        fs::create_directories(dir);
        ojson written = ojson::array();
        for (const auto& v : catalog) {
            const auto path = dir / (safe_file_stem(v.video_id) + ".avc.txt");
            write_text(path, render(v.transcript()) + "\n");
            written.push_back(path.string());
        }
        if (f_.json) {
            out_ << ojson{{"written", written}}.dump(2) << "\n";
        } else {
            out_ << "wrote " << written.size() << " transcripts to " << dir.string() << "\n";
        }
    }

    void index_build() {
        const auto catalog = load();
        const auto embedder = make_embedding_provider(config_.embedding);
        BuildOptions options;
        options.variant = variant(f_.variant);
        options.chunking = config_.chunking;
        const auto built = build_index(catalog, *embedder, options);
        save_index(built.index, config_.index);
        if (f_.json) {
            ojson j{{"index", config_.index.string()},
                    {"entries", built.index.size()},
                    {"videos", built.index.video_count()},
                    {"dim", built.index.dim()},
                    {"skipped", built.skipped_video_ids}};
            out_ << j.dump(2) << "\n";
        } else {
            out_ << "indexed " << built.index.size() << " entries from " << built.index.video_count() << " videos ("
                 << field_variant_name(options.variant) << ", dim " << built.index.dim() << ") -> "
                 << config_.index.string() << "\n";
            for (const auto& id : built.skipped_video_ids) out_ << "skipped " << id << ": no text\n";
        }
    }

    void index_inspect() {
        const auto index = load_index(require_index());
        ojson j{{"index", config_.index.string()},
                {"dim", index.dim()},
                {"entries", index.size()},
                {"videos", index.video_count()},
                {"meta", index.meta().to_json()}};
        if (f_.json) {
            out_ << j.dump(2) << "\n";
            return;
        }
        out_ << "index:    " << config_.index.string() << "\n"
             << "variant:  " << field_variant_name(index.meta().variant) << (index.meta().chunked ? " (chunked)" : "")
             << "\n"
             << "embedder: " << index.meta().embedding.dump() << "\n"
             << "dim:      " << index.dim() << "\n"
             << "entries:  " << index.size() << "\n"
             << "videos:   " << index.video_count() << "\n";
    }

    void query() {
        const auto engine = load_engine();
        const auto result =
            engine->answer(f_.query, f_.tool.empty() ? std::nullopt : std::optional<std::string>(f_.tool), config_.k);
        if (f_.json) {
            out_ << query_result_to_json(result).dump(2) << "\n";
            return;
        }
        const auto& p = result.payload;
        out_ << "[" << answer_type_name(p.type()) << "] via tool " << result.trace.tool_id << "\n";
        if (const auto* h = std::get_if<HowToAnswer>(&p.body)) {
            out_ << h->title << "\n";
            for (std::size_t i = 0; i < h->steps.size(); ++i) out_ << "  " << (i + 1) << ". " << h->steps[i] << "\n";
        } else if (const auto* pl = std::get_if<PlaceAnswer>(&p.body)) {
            out_ << pl->name << "\n" << pl->description << "\nWhy notable: " << pl->why_notable << "\n";
        } else {
            out_ << std::get<GeneralAnswer>(p.body).text << "\n";
        }
        if (!p.citations.empty()) out_ << "\nsources:\n";
        for (const auto& c : p.citations) {
            out_ << "  " << c.title << " (" << c.video_id << ") " << format_timestamp(c.time_span.start_ms) << " --> "
                 << format_timestamp(c.time_span.end_ms);
            if (!c.deep_link_url.empty()) out_ << "  " << c.deep_link_url;
            out_ << "\n";
        }
    }

    void gen_questions() {
        const auto catalog = load();
        const auto llm = make_llm_provider(config_.question_llm);
        QuestionGenOptions options;
        options.n_videos = f_.n_videos.value_or(std::min<std::size_t>(500, catalog.size()));
        options.n_questions = f_.n_questions;
        options.questions_per_video = f_.per_video;
        options.seed = config_.seed;
        options.chunking = config_.chunking;
        const auto questions = generate_questions(catalog, *llm, options);
        write_text(f_.out, questions_to_jsonl(questions));
        if (f_.json) {
            out_ << ojson{{"questions", questions.size()}, {"out", f_.out}, {"seed", config_.seed}}.dump(2) << "\n";
        } else {
            out_ << "wrote " << questions.size() << " questions to " << f_.out << "\n";
        }
    }

    void eval_retrieval() {
        const auto catalog = load();
        const auto questions = load_questions(f_.questions);
        const auto embedder = make_embedding_provider(config_.embedding);
        std::vector<EvalConfig> configs;
        if (f_.variants.empty()) {
            for (auto v : kAllFieldVariants) configs.push_back({embedder, v});
        } else {
            for (const auto& name : f_.variants) configs.push_back({embedder, variant(name)});
        }
        EvalJudges judges;
        judges.hit_judge = make_llm_provider(config_.judge_llm);
        judges.answerer = make_llm_provider(config_.answer_llm);
        judges.quality_judge = judges.hit_judge;
        EvalOptions options;
        options.k_max = f_.k_max;
        options.chunking = config_.chunking;
        options.max_in_flight = config_.judge_llm.max_in_flight;
        std::erase_if(options.report_ks, [&](std::size_t k) { return k > options.k_max; });
        if (options.report_ks.empty()) options.report_ks = {options.k_max};

        const auto reports = run_retrieval_eval(catalog, questions, configs, judges, options);
        const auto json_text = report_to_json(reports).dump(2) + "\n";
        const auto table = render_report_table(reports);
        if (!f_.out.empty()) {
            write_text(f_.out + ".json", json_text);
            write_text(f_.out + ".txt", table);
            write_text(f_.out + ".csv", render_report_csv(reports));
        }
        out_ << (f_.json ? json_text : table);
    }

    void eval_summaries() {
        auto catalog = load();
        if (f_.n_videos) {
            std::vector<VideoDocument> sample;
            for (auto i : sample_indices(catalog.size(), *f_.n_videos, config_.seed)) sample.push_back(catalog[i]);
            catalog = std::move(sample);
        }
        const auto llm = make_llm_provider(config_.answer_llm);
        SummaryScorer scorer;
        if (f_.scorer == "token-f1") {
            scorer = token_f1_scorer();
        } else if (f_.scorer == "embedding-cosine") {
            scorer = embedding_cosine_scorer(make_embedding_provider(config_.embedding));
        } else {
            throw Error(ErrorCode::kInvalidParams, "unknown scorer '" + f_.scorer + "'");
        }
        const auto report = run_summary_eval(catalog, *llm, scorer, f_.scorer);
        const auto json_text = summary_report_to_json(report).dump(2) + "\n";
        const auto table = render_summary_table(report);
        if (!f_.out.empty()) {
            write_text(f_.out + ".json", json_text);
            write_text(f_.out + ".txt", table);
        }
        out_ << (f_.json ? json_text : table);
    }

    void serve() {
        ServerOptions options;
        options.host = config_.host;
        options.port = config_.port;
        RagServer server(load_engine(), options);
        err_ << "vidrag " << VIDRAG_VERSION << " listening on " << options.host << ":" << options.port << std::endl;
        server.run();
    }

private:
    std::vector<VideoDocument> load() {
        if (config_.catalog.empty()) throw Error(ErrorCode::kInvalidParams, "no catalog given (--catalog or config)");
        auto catalog = load_catalog(config_.catalog);
        if (!f_.subtitles_dir.empty()) attach_subtitles(catalog, f_.subtitles_dir);
        return catalog;
    }

    const fs::path& require_index() {
        if (!fs::exists(config_.index)) {
            throw Error(ErrorCode::kNotFound, "index not found: " + config_.index.string());
        }
        return config_.index;
    }

    static FieldVariant variant(const std::string& name) {
        const auto v = parse_field_variant(name);
        if (!v) throw Error(ErrorCode::kInvalidParams, "unknown variant '" + name + "'");
        return *v;
    }

    std::shared_ptr<const RagEngine> load_engine() {
        auto index = std::make_shared<const VectorIndex>(load_index(require_index()));
        auto catalog = std::make_shared<const std::vector<VideoDocument>>(load());
        const auto embedder = make_embedding_provider(config_.embedding);
        const auto& built_with = index->meta().embedding;
        if (built_with.contains("model") && built_with["model"] != config_.embedding.model_name) {
            throw Error(ErrorCode::kInvalidParams, "index was built with embedder " + built_with["model"].dump() +
                                                       " but the config uses \"" + config_.embedding.model_name + "\"");
        }
        auto tools_json = config_.tools;
        if (tools_json.empty()) {
            tools_json = nlohmann::json::array({{{"id", "all"}, {"description", "every video"}, {"videos", "*"}}});
        }
        RagProviders providers;
        providers.embedder = embedder;
        providers.synthesizer = make_llm_provider(config_.answer_llm);
        if (config_.router_llm) providers.router = make_llm_provider(*config_.router_llm);
        RagOptions options;
        options.default_k = config_.k;
        options.deep_link_template = config_.deep_link_template;
        return std::make_shared<const RagEngine>(index, catalog, tools_from_json(tools_json, *catalog), providers,
                                                 options);
    }

    const Flags& f_;
    std::ostream& out_;
    std::ostream& err_;
    RunConfig config_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Flags f;
    CLI::App app{"vidrag: aligned video caption transcripts, retrieval, evaluation and a RAG service", "vidrag"};
    app.set_version_flag("--version", VIDRAG_VERSION);
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    app.add_option("--config", f.config, "JSON run config");
    app.add_option("--seed", f.seed, "seed for every sampling step");
    app.add_flag("--json", f.json, "machine-readable output");

    auto catalog_opt = [&](CLI::App* sub) {
        sub->add_option("--catalog", f.catalog, "catalog JSON lines");
        sub->add_option("--subtitles-dir", f.subtitles_dir, "attach <video_id>.srt/.vtt to videos without cues");
    };

    auto* ingest = app.add_subcommand("ingest", "validate a catalog and report corpus statistics");
    catalog_opt(ingest);
    ingest->add_flag("--stats", f.stats, "print corpus statistics");
    ingest->add_option("--out", f.out, "write the normalized catalog here");

    auto* align_cmd = app.add_subcommand("align", "write <video_id>.avc.txt transcripts");
    catalog_opt(align_cmd);
    align_cmd->add_option("--out", f.out, "output directory")->required();

    auto* index_cmd = app.add_subcommand("index", "build or inspect a vector index");
    index_cmd->require_subcommand(1);
    auto* build = index_cmd->add_subcommand("build", "embed and index a catalog");
    catalog_opt(build);
    build->add_option("--variant", f.variant, "ASR, VISUAL_CAPTIONS, TITLE, TITLE_DESCRIPTION or ALIGNED_TRANSCRIPT");
    build->add_option("--index,--out", f.index, "index file");
    build->add_option("--max-chars", f.max_chars, "chunk size in characters")->check(CLI::PositiveNumber);
    build->add_option("--overlap", f.overlap, "lines shared by neighbouring chunks");
    auto* inspect = index_cmd->add_subcommand("inspect", "describe an index file");
    inspect->add_option("--index", f.index, "index file");

    auto* query = app.add_subcommand("query", "answer one question from the index");
    query->add_option("query", f.query, "question text")->required();
    catalog_opt(query);
    query->add_option("--index", f.index, "index file");
    query->add_option("--tool", f.tool, "retriever tool id (default: routed)");
    query->add_option("-k,--k", f.k, "videos to retrieve")->check(CLI::PositiveNumber);

    auto* gen = app.add_subcommand("gen-questions", "generate evaluation questions from transcripts");
    catalog_opt(gen);
    gen->add_option("--n-videos", f.n_videos, "videos to sample (default min(500, catalog))");
    gen->add_option("--n-questions", f.n_questions, "questions to keep")->capture_default_str();
    gen->add_option("--per-video", f.per_video, "questions asked per video")->capture_default_str();
    gen->add_option("--out", f.out, "questions JSON lines")->required();

    auto* eval = app.add_subcommand("eval", "run an evaluation");
    eval->require_subcommand(1);
    auto* retrieval = eval->add_subcommand("retrieval", "HIT@K and QUALITY@1 per field variant");
    catalog_opt(retrieval);
    retrieval->add_option("--questions", f.questions, "questions JSON lines")->required();
    retrieval->add_option("--variants", f.variants, "field variants (default: all five)");
    retrieval->add_option("--k-max", f.k_max, "retrieval depth")->capture_default_str()->check(CLI::PositiveNumber);
    retrieval->add_option("--out", f.out, "write PREFIX.json, PREFIX.txt and PREFIX.csv");
    auto* summaries = eval->add_subcommand("summaries", "compare summaries from each context variant");
    catalog_opt(summaries);
    summaries->add_option("--n-videos", f.n_videos, "videos to sample (default: all)");
    summaries->add_option("--scorer", f.scorer, "token-f1 or embedding-cosine")
        ->capture_default_str()
        ->check(CLI::IsMember({"token-f1", "embedding-cosine"}));
    summaries->add_option("--out", f.out, "write PREFIX.json and PREFIX.txt");

    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    catalog_opt(serve);
    serve->add_option("--index", f.index, "index file");
    serve->add_option("--host", f.host, "bind address");
    serve->add_option("--port", f.port, "port");

    std::vector<std::string> argv_store{"vidrag"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        Runner run(f, out, err);
        if (*ingest) run.ingest();
        else if (*align_cmd) run.align_all();
        else if (*build) run.index_build();
        else if (*inspect) run.index_inspect();
        else if (*query) run.query();
        else if (*gen) run.gen_questions();
        else if (*retrieval) run.eval_retrieval();
        else if (*summaries) run.eval_summaries();
        else if (*serve) run.serve();
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace vidrag
