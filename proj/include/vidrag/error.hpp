// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vidrag {

enum class ErrorCode {
    kMalformedTimestamp,
    kEmptyInput,
    kDuplicateVideoId,
    kSchemaError,
    kMalformedLine,
    kInvalidParams,
    kEmptyCatalog,
    kProviderError,
    kEmptyText,
    kDimensionMismatch,
    kNoIndexableText,
    kEmptyIndex,
    kIoError,
    kCorruptIndex,
    kFixtureMiss,
    kPromptTooLong,
    kBadJudgeOutput,
    kInsufficientQuestions,
    kInsufficientDepth,
    kEmptyTranscript,
    kEmptyContext,
    kJudgeBudgetExceeded,
    kNoTools,
    kUnknownTool,
    kNotFound,
};

std::string_view error_code_name(ErrorCode code);

/// Single exception type for the library. `location()` carries a 1-based line
/// number or a 0-based item index, depending on the code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message,
          std::optional<std::size_t> location = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> location() const noexcept { return location_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> location_;
};

}  // namespace vidrag
