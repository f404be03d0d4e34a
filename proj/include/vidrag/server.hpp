// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

// HTTP front end for RagEngine:
//   GET  /health                       {status, version, entries}
//   GET  /v1/tools                     [{id, description, videos}]
//   GET  /v1/videos/{id}/transcript    rendered transcript (text/plain)
//   POST /v1/query                     {query, tool?, k?} -> answer JSON
// Errors are {error: {code, message, field?}}.

#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "vidrag/rag.hpp"

namespace httplib {
class Server;
}

namespace vidrag {

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::size_t max_k = 100;
};

class RagServer {
public:
    explicit RagServer(std::shared_ptr<const RagEngine> engine, ServerOptions options = {});
    ~RagServer();
    RagServer(const RagServer&) = delete;
    RagServer& operator=(const RagServer&) = delete;

    /// Binds and serves on a background thread; returns the bound port.
    /// Throws Error(kIoError) when the port cannot be bound.
    int start();
    /// Binds and serves on the calling thread until stop().
    void run();
    void stop();

    /// Requests in flight keep the engine they started with.
    void swap_engine(std::shared_ptr<const RagEngine> engine);
    std::shared_ptr<const RagEngine> engine() const;

private:
    int bind();
    void install_routes();

    std::unique_ptr<httplib::Server> http_;
    ServerOptions options_;
    mutable std::mutex mutex_;
    std::shared_ptr<const RagEngine> engine_;
    std::thread thread_;
};

}  // namespace vidrag
