#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "hypersmote/hgconv.hpp"
#include "hypersmote/hypergraph.hpp"
#include "hypersmote/tensor.hpp"

namespace hypersmote {

struct MinorityPolicy {
  Index num_minority_classes = 3;
};

struct FixedCount {
  Index n = 3;
};
struct AdaptiveCount {};

/// fixed(n): every training node of a minority class is augmented n times.
/// adaptive: nominal per-node count max(1, round(N_max / N_c) - 1).
using CountPolicy = std::variant<FixedCount, AdaptiveCount>;

std::string to_string(const CountPolicy& policy);
CountPolicy parse_count_policy(const std::string& text);  // "adaptive" or a positive integer

/// Training-split label counts per class.
std::vector<Index> class_counts(std::span<const Index> labels, std::span<const Index> rows, Index num_classes);

/// k classes with the fewest training labels, ordered by (count, class id).
std::vector<Index> select_minority(std::span<const Index> labels, const Split& split, Index num_classes,
                                   const MinorityPolicy& policy);

/// Nominal per-node augmentation count for each class in `classes`.
std::vector<Index> augmentation_count(const CountPolicy& policy, std::span<const Index> class_counts,
                                      std::span<const Index> classes);

/// tau * E[v] + (1 - tau) * mean(E[neighbors of v]); E[v] itself when v has
/// no neighbours.
RowVector generate_embedding(const Hypergraph& g, const Matrix& emb, Index target, double tau);

struct PlanEntry {
  Index target = 0;
  Index label = 0;
  double tau = 0.0;
  RowVector embedding;  // synthesized in the encoder space (drives attachment)
  RowVector features;   // same interpolation over the raw feature matrix
  Index hyperedge = -1;  // attached hyperedge, -1 until expansion

  friend bool operator==(const PlanEntry& a, const PlanEntry& b);
};

struct AugmentationPlan {
  std::vector<PlanEntry> entries;
  std::vector<Index> minority_classes;
  std::vector<Index> per_class_added;  // indexed by class id

  friend bool operator==(const AugmentationPlan&, const AugmentationPlan&) = default;
};

struct PlanConfig {
  double tau = 0.3;
  CountPolicy count = AdaptiveCount{};
  MinorityPolicy minority;
  bool jitter = true;  // gaussian jitter on repetitions after the first
  double jitter_scale = 0.01;
  std::uint64_t seed = 0;
};

/// Entries are emitted in ascending target id, then repetition index.
AugmentationPlan build_plan(const Hypergraph& g, const Matrix& embeddings, const Matrix& features,
                            std::span<const Index> labels, Index num_classes, const Split& split,
                            const PlanConfig& config);

}  // namespace hypersmote
