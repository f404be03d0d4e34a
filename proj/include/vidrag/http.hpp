// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <string>

namespace vidrag {

/// Attempts are retried only on transport failures, HTTP 429 and 5xx.
struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double backoff_multiplier = 2.0;
    std::chrono::seconds timeout{60};
};

/// Splits "https://host:port/v1" into the origin ("https://host:port") and
/// the path prefix ("/v1"). The prefix never ends with '/'.
struct BaseUrl {
    std::string origin;
    std::string path_prefix;
};
BaseUrl split_base_url(const std::string& url);

/// POSTs a JSON body with an optional bearer token and returns the response
/// body of the first 2xx reply. Throws Error(kProviderError) when attempts
/// are exhausted or the status is not retryable (e.g. 401).
std::string post_json(const std::string& base_url, const std::string& path, const std::string& body,
                      const std::string& bearer_token, const RetryPolicy& policy);

}  // namespace vidrag
