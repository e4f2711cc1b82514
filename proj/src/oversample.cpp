#include "hypersmote/oversample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hypersmote {

bool operator==(const PlanEntry& a, const PlanEntry& b) {
  auto same = [](const RowVector& x, const RowVector& y) { return x.size() == y.size() && x == y; };
  return a.target == b.target && a.label == b.label && a.tau == b.tau && a.hyperedge == b.hyperedge &&
         same(a.embedding, b.embedding) && same(a.features, b.features);
}

std::string to_string(const CountPolicy& policy) {
  if (std::holds_alternative<AdaptiveCount>(policy)) return "adaptive";
  return std::to_string(std::get<FixedCount>(policy).n);
}

CountPolicy parse_count_policy(const std::string& text) {
  if (text == "adaptive") return AdaptiveCount{};
  std::size_t used = 0;
  long long n = 0;
  try {
    n = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("count policy must be 'adaptive' or a positive integer, got '" + text + "'");
  }
  if (used != text.size() || n < 1) {
    throw std::invalid_argument("count policy must be 'adaptive' or a positive integer, got '" + text + "'");
  }
  return FixedCount{static_cast<Index>(n)};
}

std::vector<Index> class_counts(std::span<const Index> labels, std::span<const Index> rows, Index num_classes) {
  std::vector<Index> counts(static_cast<std::size_t>(num_classes), 0);
  for (Index r : rows) {
    const Index c = labels[r];
    if (c < 0 || c >= num_classes) throw std::out_of_range("label out of range");
    ++counts[c];
  }
  return counts;
}

std::vector<Index> select_minority(std::span<const Index> labels, const Split& split, Index num_classes,
                                   const MinorityPolicy& policy) {
  if (split.train.empty()) throw std::invalid_argument("select_minority: empty training split");
  if (policy.num_minority_classes < 0 || policy.num_minority_classes > num_classes) {
    throw std::invalid_argument("select_minority: more minority classes requested than exist");
  }
  const auto counts = class_counts(labels, split.train, num_classes);
  std::vector<Index> order(static_cast<std::size_t>(num_classes));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return counts[a] < counts[b]; });
  order.resize(static_cast<std::size_t>(policy.num_minority_classes));
  return order;
}

std::vector<Index> augmentation_count(const CountPolicy& policy, std::span<const Index> counts,
                                      std::span<const Index> classes) {
  std::vector<Index> out;
  if (const auto* fixed = std::get_if<FixedCount>(&policy)) {
    if (fixed->n < 1) throw std::invalid_argument("fixed count must be >= 1");
    out.assign(classes.size(), fixed->n);
    return out;
  }
  const Index n_max = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  for (Index c : classes) {
    const Index n_c = counts[c];
    if (n_c < 1) throw std::invalid_argument("augmentation_count: class " + std::to_string(c) + " has no samples");
    const auto ratio = static_cast<Index>(std::llround(static_cast<double>(n_max) / static_cast<double>(n_c)));
    out.push_back(std::max<Index>(1, ratio - 1));
  }
  return out;
}

RowVector generate_embedding(const Hypergraph& g, const Matrix& emb, Index target, double tau) {
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("tau must lie in [0, 1]");
  if (emb.rows() != g.num_nodes()) throw std::invalid_argument("embedding rows != node count");
  const auto hood = neighbors(g, target);
  if (hood.neighbors.empty()) return emb.row(target);
  RowVector mean = RowVector::Zero(emb.cols());
  for (Index u : hood.neighbors) mean += emb.row(u);
  mean /= static_cast<double>(hood.neighbors.size());
  return tau * emb.row(target) + (1.0 - tau) * mean;
}

namespace {

double entry_std(const Matrix& m) {
  if (m.size() < 2) return 0.0;
  const double mean = m.mean();
  return std::sqrt((m.array() - mean).square().sum() / static_cast<double>(m.size() - 1));
}

// Per-node repetition counts for the training nodes of one class.
std::vector<Index> repetitions(const CountPolicy& policy, Index nominal, Index n_c, Index n_max) {
  if (std::holds_alternative<FixedCount>(policy)) return std::vector<Index>(static_cast<std::size_t>(n_c), nominal);
  // Adaptive: spread exactly n_max - n_c new nodes so the class lands on n_max.
  const Index deficit = n_max - n_c;
  if (deficit <= 0) return std::vector<Index>(static_cast<std::size_t>(n_c), 1);
  std::vector<Index> reps(static_cast<std::size_t>(n_c), deficit / n_c);
  for (Index j = 0; j < deficit % n_c; ++j) ++reps[j];
  return reps;
}

}  // namespace

AugmentationPlan build_plan(const Hypergraph& g, const Matrix& embeddings, const Matrix& features,
                            std::span<const Index> labels, Index num_classes, const Split& split,
                            const PlanConfig& config) {
  if (config.tau < 0.0 || config.tau > 1.0) throw std::invalid_argument("tau must lie in [0, 1]");
  if (embeddings.rows() != g.num_nodes() || features.rows() != g.num_nodes()) {
    throw std::invalid_argument("build_plan: embedding/feature rows != node count");
  }
  AugmentationPlan plan;
  plan.minority_classes = select_minority(labels, split, num_classes, config.minority);
  if (plan.minority_classes.empty()) throw std::invalid_argument("build_plan: no minority classes selected");

  const auto counts = class_counts(labels, split.train, num_classes);
  for (Index c : plan.minority_classes) {
    if (counts[c] == 0) throw std::invalid_argument("minority class " + std::to_string(c) + " has no training nodes");
  }
  const auto nominal = augmentation_count(config.count, counts, plan.minority_classes);
  const Index n_max = *std::max_element(counts.begin(), counts.end());

  std::vector<Index> train_sorted(split.train.begin(), split.train.end());
  std::sort(train_sorted.begin(), train_sorted.end());

  // reps_for[node] = repetition count; position within class decides the
  // remainder share in adaptive mode.
  std::vector<Index> reps_for(static_cast<std::size_t>(g.num_nodes()), 0);
  for (std::size_t k = 0; k < plan.minority_classes.size(); ++k) {
    const Index c = plan.minority_classes[k];
    const auto reps = repetitions(config.count, nominal[k], counts[c], n_max);
    std::size_t pos = 0;
    for (Index v : train_sorted) {
      if (labels[v] == c) reps_for[v] = reps[pos++];
    }
  }

  Rng rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double emb_sigma = config.jitter_scale * entry_std(embeddings);
  const double feat_sigma = config.jitter_scale * entry_std(features);

  plan.per_class_added.assign(static_cast<std::size_t>(num_classes), 0);
  for (Index v : train_sorted) {
    if (reps_for[v] == 0) continue;
    const RowVector emb = generate_embedding(g, embeddings, v, config.tau);
    const RowVector feat = generate_embedding(g, features, v, config.tau);
    for (Index r = 0; r < reps_for[v]; ++r) {
      PlanEntry entry{v, labels[v], config.tau, emb, feat, -1};
      if (config.jitter && r > 0) {
        for (Index i = 0; i < entry.embedding.size(); ++i) entry.embedding(i) += emb_sigma * normal(rng);
        for (Index i = 0; i < entry.features.size(); ++i) entry.features(i) += feat_sigma * normal(rng);
      }
      plan.entries.push_back(std::move(entry));
      ++plan.per_class_added[labels[v]];
    }
  }
  return plan;
}

}  // namespace hypersmote
