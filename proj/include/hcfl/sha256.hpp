#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace hcfl {

using Digest = std::array<std::uint8_t, 32>;

inline constexpr Digest kZeroDigest{};

Digest sha256(std::string_view bytes);

/// Lowercase hex.
std::string to_hex(const Digest& d);

/// Accepts exactly 64 hex characters; throws std::invalid_argument otherwise.
Digest digest_from_hex(std::string_view hex);

}  // namespace hcfl
