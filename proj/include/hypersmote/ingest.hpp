#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypersmote/artifact.hpp"
#include "hypersmote/expansion.hpp"
#include "hypersmote/hgconv.hpp"
#include "hypersmote/hypergraph.hpp"
#include "hypersmote/oversample.hpp"

namespace hypersmote {

struct DatasetBundle {
  std::string name;
  std::string rule;  // cocitation | hyperedge-list | synthetic
  std::uint64_t seed = 0;
  Hypergraph graph;
  Matrix features;
  std::vector<Index> labels;
  std::vector<std::string> class_names;
  Split split;
  nlohmann::json meta = nlohmann::json::object();  // extra provenance (e.g. augmentation settings)

  Index num_classes() const { return static_cast<Index>(class_names.size()); }
  /// Throws on any shape, range, finiteness, or split inconsistency.
  void validate() const;
};

bool operator==(const DatasetBundle& a, const DatasetBundle& b);

// ---------------------------------------------------------------------------
// Raw citation files.
// ---------------------------------------------------------------------------

/// Parsed `<id>\t<f_1>...\t<f_D>\t<label>` lines. Node index = line order;
/// class ids follow sorted class-name order.
struct ContentTable {
  std::vector<std::string> ids;
  Matrix features;
  std::vector<Index> labels;
  std::vector<std::string> class_names;
};

ContentTable load_content(const std::filesystem::path& path);

struct CitationGraph {
  Hypergraph graph;
  std::size_t skipped_citations = 0;  // pairs naming an unknown paper id
  std::size_t dropped_hyperedges = 0;  // co-citation sets with < 2 members
};

/// Co-citation hyperedges: for each paper p (in node order), {p} together
/// with every paper citing p. Sets with fewer than two members are dropped.
CitationGraph cocitation_hypergraph(const ContentTable& content, const std::filesystem::path& cites_path);

/// One hyperedge per line, space-separated 0-based node indices.
Hypergraph load_hyperedge_list(const std::filesystem::path& path, Index num_nodes);

// ---------------------------------------------------------------------------
// Splits.
// ---------------------------------------------------------------------------

struct SplitProtocol {
  Index train = 140;
  Index val = 500;
  Index test = 1000;
};

/// Known protocols: cora / cora-ca (140/500/1000), citeseer (120/500/1015).
SplitProtocol split_protocol_for(const std::string& dataset);

/// Training nodes are drawn per class in proportion to class frequency
/// (largest remainder, at least one per class when possible); validation and
/// test nodes are then drawn uniformly from the remainder.
Split make_split(std::span<const Index> labels, Index num_classes, const SplitProtocol& protocol, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic fixtures.
// ---------------------------------------------------------------------------

struct SynthConfig {
  std::vector<Index> train_counts{40, 4};  // training nodes per class
  Index val_per_class = 20;
  std::vector<Index> val_counts;  // per class; overrides val_per_class when non-empty
  Index test_per_class = 20;
  Index nodes_per_hyperedge = 4;
  double homophily = 0.9;
  Index dim = 16;
  double noise = 1.0;  // feature std around the class mean
  std::uint64_t seed = 0;
};

/// Class c has mean e_c / sqrt(2) (unit distance between class means). Every
/// node anchors one hyperedge whose other members come from the anchor's class
/// with probability `homophily`, otherwise uniformly from all nodes.
DatasetBundle synth_imbalanced(const SynthConfig& config);

// ---------------------------------------------------------------------------
// Artifact round-trips.
// ---------------------------------------------------------------------------

Artifact to_artifact(const DatasetBundle& bundle, const std::string& kind = "bundle");
DatasetBundle bundle_from_artifact(const Artifact& a);

void save_bundle(const std::filesystem::path& path, const DatasetBundle& bundle);
/// Accepts both plain and expanded bundles.
DatasetBundle load_bundle(const std::filesystem::path& path);

struct PlanMeta {
  std::uint64_t seed = 0;
  std::string variant;
  std::string count_policy;
  std::string dataset;
};

void save_plan(const std::filesystem::path& path, const AugmentationPlan& plan, const PlanMeta& meta);
AugmentationPlan load_plan(const std::filesystem::path& path, PlanMeta* meta = nullptr);

/// Throws when plan rows cannot belong to `bundle` (feature width, target or
/// label range).
void validate_plan(const AugmentationPlan& plan, const DatasetBundle& bundle);

struct Checkpoint {
  ClassifierModel model;
  TrainConfig config;
  std::string dataset;
  int best_epoch = -1;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hypersmote
