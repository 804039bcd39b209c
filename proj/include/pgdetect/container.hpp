#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pgd {

/// Single-file model container shared by every method.
///
///   magic     8 bytes  "PGN4MDL\n"
///   version   u32 LE
///   header    u64 LE byte length, then UTF-8 JSON
///   payload   u64 LE value count, then IEEE-754 doubles, little-endian
///   checksum  u64 LE FNV-1a over every preceding byte
inline constexpr std::uint32_t kContainerVersion = 1;

struct Container {
  nlohmann::json header;
  std::vector<double> payload;
};

class ContainerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string encode_container(const Container& c);
/// Throws ContainerError on bad magic, unknown version, truncation or checksum mismatch.
Container decode_container(const std::string& bytes);

void save_container(const Container& c, const std::filesystem::path& path);
Container load_container(const std::filesystem::path& path);

std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace pgd
