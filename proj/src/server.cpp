// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/server.hpp"

#include <httplib.h>

#include "vidrag/error.hpp"

namespace vidrag {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kJsonType = "application/json; charset=utf-8";

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                const std::string& field = {}) {
    ojson err{{"code", code}, {"message", message}};
    if (!field.empty()) err["field"] = field;
    res.status = status;
    res.set_content(ojson{{"error", err}}.dump(), kJsonType);
}

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidParams:
        case ErrorCode::kUnknownTool:
            return 400;
        case ErrorCode::kNotFound:
            return 404;
        case ErrorCode::kEmptyIndex:
            return 503;
        case ErrorCode::kProviderError:
        case ErrorCode::kFixtureMiss:
        case ErrorCode::kPromptTooLong:
            return 502;
        default:
            return 500;
    }
}

struct QueryBody {
    std::string query;
    std::optional<std::string> tool;
    std::optional<std::size_t> k;
};

// Returns false after writing a 400 response.
bool parse_query_body(const std::string& raw, std::size_t max_k, QueryBody& out, httplib::Response& res) {
    json body;
    try {
        body = json::parse(raw);
    } catch (const json::parse_error& e) {
        send_error(res, 400, "MalformedBody", std::string("body is not valid JSON: ") + e.what());
        return false;
    }
    if (!body.is_object()) {
        send_error(res, 400, "MalformedBody", "body must be a JSON object");
        return false;
    }
    const auto q = body.find("query");
    if (q == body.end()) {
        send_error(res, 400, "MissingField", "\"query\" is required", "query");
        return false;
    }
    if (!q->is_string() || q->get_ref<const std::string&>().find_first_not_of(" \t\r\n") == std::string::npos) {
        send_error(res, 400, "InvalidField", "\"query\" must be a non-empty string", "query");
        return false;
    }
    out.query = q->get<std::string>();
    if (const auto t = body.find("tool"); t != body.end() && !t->is_null()) {
        if (!t->is_string() || t->get_ref<const std::string&>().empty()) {
            send_error(res, 400, "InvalidField", "\"tool\" must be a non-empty string", "tool");
            return false;
        }
        out.tool = t->get<std::string>();
    }
    if (const auto k = body.find("k"); k != body.end() && !k->is_null()) {
        if (!k->is_number_integer() || k->get<std::int64_t>() < 1 ||
            k->get<std::int64_t>() > static_cast<std::int64_t>(max_k)) {
            send_error(res, 400, "InvalidField", "\"k\" must be an integer in 1.." + std::to_string(max_k), "k");
            return false;
        }
        out.k = static_cast<std::size_t>(k->get<std::int64_t>());
    }
    return true;
}

}  // namespace

RagServer::RagServer(std::shared_ptr<const RagEngine> engine, ServerOptions options)
    : http_(std::make_unique<httplib::Server>()), options_(std::move(options)), engine_(std::move(engine)) {
    if (!engine_) throw Error(ErrorCode::kInvalidParams, "server needs an engine");
    install_routes();
}

RagServer::~RagServer() { stop(); }

void RagServer::swap_engine(std::shared_ptr<const RagEngine> engine) {
    if (!engine) throw Error(ErrorCode::kInvalidParams, "server needs an engine");
    std::lock_guard<std::mutex> lock(mutex_);
    engine_ = std::move(engine);
}

std::shared_ptr<const RagEngine> RagServer::engine() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return engine_;
}

void RagServer::install_routes() {
    // httplib also sets SO_REUSEPORT, which lets a second server share a busy
    // port silently. Keep only SO_REUSEADDR.
    http_->set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    http_->set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    http_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    http_->Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        const auto e = engine();
        ojson body{{"status", "ok"}, {"version", VIDRAG_VERSION}, {"entries", e->index().size()}};
        res.set_content(body.dump(), kJsonType);
    });

    http_->Get("/v1/tools", [this](const httplib::Request&, httplib::Response& res) {
        const auto e = engine();
        ojson tools = ojson::array();
        for (const auto& t : e->tools()) {
            tools.push_back({{"id", t.tool_id}, {"description", t.description}, {"videos", t.video_ids}});
        }
        res.set_content(ojson{{"tools", tools}}.dump(), kJsonType);
    });

    http_->Get(R"(/v1/videos/([^/]+)/transcript)", [this](const httplib::Request& req, httplib::Response& res) {
        const auto e = engine();
        const std::string id = req.matches[1];
        if (!e->store().contains(id)) {
            send_error(res, 404, "NotFound", "unknown video '" + id + "'");
            return;
        }
        res.set_content(e->store().rendered_transcript(id), "text/plain; charset=utf-8");
    });

    http_->Post("/v1/query", [this](const httplib::Request& req, httplib::Response& res) {
        QueryBody body;
        if (!parse_query_body(req.body, options_.max_k, body, res)) return;
        const auto e = engine();
        try {
            const auto result = e->answer(body.query, body.tool, body.k);
            res.set_content(query_result_to_json(result).dump(), kJsonType);
        } catch (const Error& err) {
            const auto field = err.code() == ErrorCode::kUnknownTool ? std::string("tool") : std::string();
            send_error(res, status_for(err.code()), error_code_name(err.code()), err.what(), field);
        } catch (const std::exception& err) {
            send_error(res, 500, "Internal", err.what());
        }
    });
}

int RagServer::bind() {
    int port = options_.port;
    if (port == 0) {
        port = http_->bind_to_any_port(options_.host);
    } else if (!http_->bind_to_port(options_.host, port)) {
        port = -1;
    }
    if (port < 0) {
        throw Error(ErrorCode::kIoError,
                    "cannot bind " + options_.host + ":" + std::to_string(options_.port));
    }
    return port;
}

int RagServer::start() {
    const int port = bind();
    thread_ = std::thread([this] { http_->listen_after_bind(); });
    http_->wait_until_ready();
    return port;
}

void RagServer::run() {
    bind();
    http_->listen_after_bind();
}

void RagServer::stop() {
    if (http_) http_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace vidrag
