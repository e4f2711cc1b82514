#pragma once

// Single-file container:
//   "HSMK1" | u32 LE header length | JSON header | payload blocks | u32 LE CRC32
// The CRC covers every byte before the trailer. Block locations are listed in
// the header ("blocks": name -> dtype, shape, offset, bytes; offsets are
// relative to the start of the payload). Floats are stored as raw
// little-endian IEEE-754 doubles, so load(save(x)) is bit-exact.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypersmote/hypergraph.hpp"
#include "hypersmote/tensor.hpp"

namespace hypersmote {

inline constexpr int kArtifactVersion = 1;

struct Block {
  std::string dtype;  // "f64" or "i64"
  std::vector<std::int64_t> shape;
  std::vector<std::uint8_t> bytes;
};

struct Artifact {
  std::string kind;
  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, Block> blocks;

  void put(const std::string& name, const Matrix& m);
  void put(const std::string& name, std::span<const Index> v);

  Matrix get_matrix(const std::string& name) const;
  std::vector<Index> get_indices(const std::string& name) const;
  bool has(const std::string& name) const { return blocks.count(name) > 0; }
};

std::vector<std::uint8_t> encode_artifact(const Artifact& a);
Artifact decode_artifact(std::span<const std::uint8_t> bytes);

void write_artifact(const std::filesystem::path& path, const Artifact& a);
Artifact read_artifact(const std::filesystem::path& path);

/// Throws when the artifact kind differs from `expected`.
void expect_kind(const Artifact& a, const std::string& expected);

}  // namespace hypersmote
