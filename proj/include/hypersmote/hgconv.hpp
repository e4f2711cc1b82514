#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hypersmote/hypergraph.hpp"
#include "hypersmote/tensor.hpp"

namespace hypersmote {

/// One round of hyperedge message passing:
///   E_edge = mean over members of relu(X W1)
///   E_node = mean over incident hyperedges of relu(E_edge W2)
struct HGConvLayer {
  Linear w1;
  Linear w2;

  static HGConvLayer init(Index in_dim, Index out_dim, Rng& rng);
};

Var edge_step(const HGConvLayer& layer, const Hypergraph& g, Var x);
/// Nodes without any incident hyperedge receive a zero row.
Var node_step(const HGConvLayer& layer, const Hypergraph& g, Var edge_emb);

struct LayerOutput {
  Var edges;
  Var nodes;
};
LayerOutput conv(const HGConvLayer& layer, const Hypergraph& g, Var x);

struct ClassifierConfig {
  Index hidden_dim = 64;
  int num_layers = 2;
  double dropout = 0.5;
};

struct ClassifierModel {
  std::vector<HGConvLayer> layers;
  Linear head;

  static ClassifierModel init(Index in_dim, Index num_classes, const ClassifierConfig& config, Rng& rng);

  Index in_dim() const { return layers.front().w1.in_dim(); }
  Index num_classes() const { return head.out_dim(); }

  /// Every learnable matrix in a fixed order (layer w1, w2, ..., head weight, head bias).
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
};

struct ForwardResult {
  Var logits;
  Var embeddings;  // pre-head node embeddings
};

/// `rng` non-null enables dropout on hidden embeddings.
ForwardResult forward(const ClassifierModel& model, Tape& tape, const Hypergraph& g, const Matrix& x,
                      double dropout = 0.0, Rng* rng = nullptr);

/// Inference-only convenience: logits as a plain matrix.
Matrix predict_logits(const ClassifierModel& model, const Hypergraph& g, const Matrix& x);
std::vector<Index> argmax_rows(const Matrix& logits);

struct Split {
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;

  friend bool operator==(const Split&, const Split&) = default;
};

struct TrainConfig {
  ClassifierConfig model;
  int epochs = 200;
  double lr = 0.01;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch;
  double loss;
  double train_accuracy;
  double val_accuracy;
  double val_macro_f1;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  ClassifierModel model;  // best-validation checkpoint
  int best_epoch = -1;
  double best_val_macro_f1 = -1.0;
  std::vector<EpochRecord> history;
};

/// Softmax cross-entropy on split.train with Adam; keeps the checkpoint with
/// the highest validation Macro-F1 (earliest on ties). When split.val is
/// empty the final epoch is kept.
TrainResult train_classifier(const Hypergraph& g, const Matrix& x, std::span<const Index> labels, Index num_classes,
                             const Split& split, const TrainConfig& config);

/// Same, starting from an existing model.
TrainResult train_classifier(ClassifierModel model, const Hypergraph& g, const Matrix& x,
                             std::span<const Index> labels, const Split& split, const TrainConfig& config);

}  // namespace hypersmote
