#include "hypersmote/artifact.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <zlib.h>

namespace hypersmote {

static_assert(std::endian::native == std::endian::little, "artifact payloads assume a little-endian host");

namespace {

constexpr char kMagic[] = {'H', 'S', 'M', 'K', '1'};

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, bytes.data(), static_cast<uInt>(bytes.size())));
}

std::int64_t element_count(const Block& b) {
  std::int64_t n = 1;
  for (auto d : b.shape) n *= d;
  return n;
}

}  // namespace

void Artifact::put(const std::string& name, const Matrix& m) {
  require_finite(m, ("artifact block " + name).c_str());
  Block b{"f64", {m.rows(), m.cols()}, {}};
  b.bytes.resize(static_cast<std::size_t>(m.size()) * sizeof(double));
  if (m.size()) std::memcpy(b.bytes.data(), m.data(), b.bytes.size());
  blocks[name] = std::move(b);
}

void Artifact::put(const std::string& name, std::span<const Index> v) {
  Block b{"i64", {static_cast<std::int64_t>(v.size())}, {}};
  b.bytes.resize(v.size() * sizeof(Index));
  if (!v.empty()) std::memcpy(b.bytes.data(), v.data(), b.bytes.size());
  blocks[name] = std::move(b);
}

Matrix Artifact::get_matrix(const std::string& name) const {
  auto it = blocks.find(name);
  if (it == blocks.end()) throw std::runtime_error("artifact: missing block '" + name + "'");
  const Block& b = it->second;
  if (b.dtype != "f64" || b.shape.size() != 2) throw std::runtime_error("artifact: block '" + name + "' is not f64[2]");
  Matrix m(b.shape[0], b.shape[1]);
  if (m.size()) std::memcpy(m.data(), b.bytes.data(), b.bytes.size());
  return m;
}

std::vector<Index> Artifact::get_indices(const std::string& name) const {
  auto it = blocks.find(name);
  if (it == blocks.end()) throw std::runtime_error("artifact: missing block '" + name + "'");
  const Block& b = it->second;
  if (b.dtype != "i64" || b.shape.size() != 1) throw std::runtime_error("artifact: block '" + name + "' is not i64[1]");
  std::vector<Index> v(static_cast<std::size_t>(b.shape[0]));
  if (!v.empty()) std::memcpy(v.data(), b.bytes.data(), b.bytes.size());
  return v;
}

std::vector<std::uint8_t> encode_artifact(const Artifact& a) {
  nlohmann::json header;
  header["format"] = "HSMK";
  header["version"] = kArtifactVersion;
  header["kind"] = a.kind;
  header["meta"] = a.meta;
  nlohmann::json blocks = nlohmann::json::object();
  std::int64_t offset = 0;
  for (const auto& [name, b] : a.blocks) {
    if (static_cast<std::int64_t>(b.bytes.size()) != element_count(b) * 8) {
      throw std::logic_error("artifact: block '" + name + "' size does not match its shape");
    }
    blocks[name] = {{"dtype", b.dtype},
                    {"shape", b.shape},
                    {"offset", offset},
                    {"bytes", static_cast<std::int64_t>(b.bytes.size())}};
    offset += static_cast<std::int64_t>(b.bytes.size());
  }
  header["blocks"] = blocks;
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  append_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& [name, b] : a.blocks) out.insert(out.end(), b.bytes.begin(), b.bytes.end());
  append_u32(out, crc_of(out));
  return out;
}

Artifact decode_artifact(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t prefix = sizeof(kMagic) + 4;
  if (bytes.size() < prefix + 4 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("artifact: bad magic (not an HSMK1 container)");
  }
  const std::uint32_t stored = read_u32(bytes.data() + bytes.size() - 4);
  if (stored != crc_of(bytes.first(bytes.size() - 4))) throw std::runtime_error("artifact: checksum mismatch");

  const std::uint32_t header_len = read_u32(bytes.data() + sizeof(kMagic));
  if (prefix + header_len + 4 > bytes.size()) throw std::runtime_error("artifact: truncated header");
  const auto header =
      nlohmann::json::parse(std::string(reinterpret_cast<const char*>(bytes.data() + prefix), header_len));
  if (header.value("format", "") != "HSMK") throw std::runtime_error("artifact: unknown format tag");
  if (header.value("version", -1) != kArtifactVersion) {
    throw std::runtime_error("artifact: version mismatch (file " + header["version"].dump() + ", reader " +
                             std::to_string(kArtifactVersion) + ")");
  }

  Artifact a;
  a.kind = header.at("kind").get<std::string>();
  a.meta = header.at("meta");
  const std::size_t payload = prefix + header_len;
  const std::size_t payload_end = bytes.size() - 4;
  for (const auto& [name, desc] : header.at("blocks").items()) {
    Block b;
    b.dtype = desc.at("dtype").get<std::string>();
    b.shape = desc.at("shape").get<std::vector<std::int64_t>>();
    const auto offset = desc.at("offset").get<std::size_t>();
    const auto size = desc.at("bytes").get<std::size_t>();
    if (payload + offset + size > payload_end || static_cast<std::int64_t>(size) != element_count(b) * 8) {
      throw std::runtime_error("artifact: block '" + name + "' lies outside the payload");
    }
    b.bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(payload + offset),
                   bytes.begin() + static_cast<std::ptrdiff_t>(payload + offset + size));
    a.blocks.emplace(name, std::move(b));
  }
  return a;
}

void write_artifact(const std::filesystem::path& path, const Artifact& a) {
  const auto bytes = encode_artifact(a);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Artifact read_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open artifact '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_artifact(bytes);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void expect_kind(const Artifact& a, const std::string& expected) {
  if (a.kind != expected) throw std::runtime_error("artifact kind is '" + a.kind + "', expected '" + expected + "'");
}

}  // namespace hypersmote
