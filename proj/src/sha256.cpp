#include "hcfl/sha256.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace hcfl {

Digest sha256(std::string_view bytes)
{
  Digest       out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size())
    throw std::runtime_error("EVP_Digest(sha256) failed");
  return out;
}

std::string to_hex(const Digest& d)
{
  static constexpr char kHex[] = "0123456789abcdef";
  std::string           s;
  s.reserve(d.size() * 2);
  for (auto b : d)
  {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0x0f]);
  }
  return s;
}

Digest digest_from_hex(std::string_view hex)
{
  auto nibble = [&](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9')
      return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f')
      return static_cast<std::uint8_t>(c - 'a' + 10);
    throw std::invalid_argument("bad hex digest: '" + std::string(hex) + "'");
  };
  if (hex.size() != 64)
    throw std::invalid_argument("digest must be 64 hex characters");
  Digest d{};
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return d;
}

}  // namespace hcfl
