#include "pgdetect/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pgd {

namespace {

constexpr char kMagic[8] = {'P', 'G', 'N', '4', 'M', 'D', 'L', '\n'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  void need(std::size_t n) const {
    if (pos_ + n > end_) throw ContainerError("model file truncated");
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string encode_container(const Container& c) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kContainerVersion);
  const std::string header = c.header.dump();
  put_u64(out, header.size());
  out += header;
  put_u64(out, c.payload.size());
  for (double v : c.payload) put_u64(out, std::bit_cast<std::uint64_t>(v));
  put_u64(out, fnv1a64(out.data(), out.size()));
  return out;
}

Container decode_container(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 4 + 8) throw ContainerError("model file truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ContainerError("not a model file (bad magic bytes)");
  }
  Reader version_reader(bytes, bytes.size());
  version_reader.take(sizeof(kMagic));
  const std::uint32_t version = version_reader.u32();
  if (version != kContainerVersion) {
    throw ContainerError("unsupported model format version " + std::to_string(version) +
                         " (this build reads version " + std::to_string(kContainerVersion) + ")");
  }
  const std::size_t body_end = bytes.size() - 8;
  Reader tail(bytes, bytes.size());
  tail.take(body_end);
  const std::uint64_t stored = tail.u64();
  if (stored != fnv1a64(bytes.data(), body_end)) {
    throw ContainerError("model file checksum mismatch (file is corrupted or truncated)");
  }

  Reader r(bytes, body_end);
  r.take(sizeof(kMagic));
  r.u32();
  const std::uint64_t header_len = r.u64();
  Container c;
  try {
    c.header = nlohmann::json::parse(r.take(header_len));
  } catch (const nlohmann::json::parse_error& e) {
    throw ContainerError(std::string("model header is not valid JSON: ") + e.what());
  }
  const std::uint64_t count = r.u64();
  if (count > (body_end - r.pos()) / 8) throw ContainerError("model file truncated");
  c.payload.resize(count);
  for (auto& v : c.payload) v = std::bit_cast<double>(r.u64());
  if (r.pos() != body_end) throw ContainerError("model file has trailing bytes");
  return c;
}

void save_container(const Container& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::string bytes = encode_container(c);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Container load_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_container(buf.str());
}

}  // namespace pgd
