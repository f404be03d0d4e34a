// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/http.hpp"

#include <thread>

#include "httplib.h"
#include "vidrag/error.hpp"

namespace vidrag {

BaseUrl split_base_url(const std::string& url) {
    BaseUrl out;
    const auto scheme = url.find("://");
    const auto host_begin = scheme == std::string::npos ? 0 : scheme + 3;
    const auto slash = url.find('/', host_begin);
    out.origin = url.substr(0, slash);
    if (slash != std::string::npos) out.path_prefix = url.substr(slash);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
    return out;
}

std::string post_json(const std::string& base_url, const std::string& path, const std::string& body,
                      const std::string& bearer_token, const RetryPolicy& policy) {
    const auto base = split_base_url(base_url);
    httplib::Client client(base.origin);
    if (!client.is_valid()) throw Error(ErrorCode::kProviderError, "invalid endpoint '" + base_url + "'");
    client.set_connection_timeout(policy.timeout);
    client.set_read_timeout(policy.timeout);
    client.set_write_timeout(policy.timeout);
    if (!bearer_token.empty()) client.set_bearer_token_auth(bearer_token);

    const auto full_path = base.path_prefix + path;
    auto backoff = policy.initial_backoff;
    std::string last_error;
    const int attempts = std::max(1, policy.max_attempts);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        auto res = client.Post(full_path, body, "application/json");
        bool retryable = true;
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
        } else if (res->status >= 200 && res->status < 300) {
            return res->body;
        } else {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300);
            retryable = res->status == 429 || res->status >= 500;
        }
        if (!retryable || attempt == attempts) break;
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(
            static_cast<std::int64_t>(static_cast<double>(backoff.count()) * policy.backoff_multiplier));
    }
    throw Error(ErrorCode::kProviderError, base_url + path + " failed: " + last_error);
}

}  // namespace vidrag
