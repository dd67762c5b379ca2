#include "groundline/hashing.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace groundline {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: EVP_Digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string base64_encode(std::string_view data) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve(((data.size() + 2) / 3) * 4);
  std::size_t i = 0;
  while (i + 3 <= data.size()) {
    const auto a = static_cast<unsigned char>(data[i]);
    const auto b = static_cast<unsigned char>(data[i + 1]);
    const auto c = static_cast<unsigned char>(data[i + 2]);
    out.push_back(alphabet[a >> 2]);
    out.push_back(alphabet[((a & 0x3) << 4) | (b >> 4)]);
    out.push_back(alphabet[((b & 0xf) << 2) | (c >> 6)]);
    out.push_back(alphabet[c & 0x3f]);
    i += 3;
  }
  const std::size_t rem = data.size() - i;
  if (rem == 1) {
    const auto a = static_cast<unsigned char>(data[i]);
    out.push_back(alphabet[a >> 2]);
    out.push_back(alphabet[(a & 0x3) << 4]);
    out += "==";
  } else if (rem == 2) {
    const auto a = static_cast<unsigned char>(data[i]);
    const auto b = static_cast<unsigned char>(data[i + 1]);
    out.push_back(alphabet[a >> 2]);
    out.push_back(alphabet[((a & 0x3) << 4) | (b >> 4)]);
    out.push_back(alphabet[(b & 0xf) << 2]);
    out.push_back('=');
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace groundline
