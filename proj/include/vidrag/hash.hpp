// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace vidrag {

/// Default seed for every persisted hash ("VIDRAG1" in ASCII).
inline constexpr std::uint64_t kStableHashSeed = 0x56494452414731ULL;

/// Stable 64-bit hash: FNV-1a over the bytes, starting from the FNV offset
/// basis xor'ed with `seed`, then passed through the splitmix64 finalizer so
/// every output bit depends on every input byte. Identical on every platform.
std::uint64_t stable_hash64(std::string_view bytes, std::uint64_t seed = kStableHashSeed);

/// 16 lowercase hex digits, zero padded.
std::string to_hex64(std::uint64_t value);

}  // namespace vidrag
