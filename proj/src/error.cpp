// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/error.hpp"

namespace vidrag {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::kMalformedTimestamp: return "MalformedTimestamp";
        case ErrorCode::kEmptyInput: return "EmptyInput";
        case ErrorCode::kDuplicateVideoId: return "DuplicateVideoId";
        case ErrorCode::kSchemaError: return "SchemaError";
        case ErrorCode::kMalformedLine: return "MalformedLine";
        case ErrorCode::kInvalidParams: return "InvalidParams";
        case ErrorCode::kEmptyCatalog: return "EmptyCatalog";
        case ErrorCode::kProviderError: return "ProviderError";
        case ErrorCode::kEmptyText: return "EmptyText";
        case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
        case ErrorCode::kNoIndexableText: return "NoIndexableText";
        case ErrorCode::kEmptyIndex: return "EmptyIndex";
        case ErrorCode::kIoError: return "IoError";
        case ErrorCode::kCorruptIndex: return "CorruptIndex";
        case ErrorCode::kFixtureMiss: return "FixtureMiss";
        case ErrorCode::kPromptTooLong: return "PromptTooLong";
        case ErrorCode::kBadJudgeOutput: return "BadJudgeOutput";
        case ErrorCode::kInsufficientQuestions: return "InsufficientQuestions";
        case ErrorCode::kInsufficientDepth: return "InsufficientDepth";
        case ErrorCode::kEmptyTranscript: return "EmptyTranscript";
        case ErrorCode::kEmptyContext: return "EmptyContext";
        case ErrorCode::kJudgeBudgetExceeded: return "JudgeBudgetExceeded";
        case ErrorCode::kNoTools: return "NoTools";
        case ErrorCode::kUnknownTool: return "UnknownTool";
        case ErrorCode::kNotFound: return "NotFound";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> location)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code),
      location_(location) {}

}  // namespace vidrag
