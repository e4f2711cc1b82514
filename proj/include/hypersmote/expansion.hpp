#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hypersmote/hgconv.hpp"
#include "hypersmote/hypergraph.hpp"
#include "hypersmote/oversample.hpp"
#include "hypersmote/tensor.hpp"

namespace hypersmote {

/// Bilinear incidence decoder: H_hat(e, v) = sigmoid(E_v . P . E_e).
struct DecoderParams {
  Matrix p;  // D x D
};

double decoder_score(const DecoderParams& dec, const RowVector& node_emb, const RowVector& edge_emb);

/// |E| x |V| matrix of decoder probabilities.
Matrix decode_incidence(const DecoderParams& dec, const Matrix& node_embs, const Matrix& edge_embs);

struct DecoderConfig {
  Index hidden_dim = 64;
  int epochs = 200;
  double lr = 0.01;
  /// 0 sums the loss over every (hyperedge, node) pair. r > 0 keeps all
  /// ones and r zeros per one, resampled every epoch.
  double negative_ratio = 0.0;
  std::uint64_t seed = 0;
};

struct TrainedDecoder {
  HGConvLayer encoder;
  DecoderParams decoder;
  Matrix node_embs;  // frozen encoder output on the original hypergraph
  Matrix edge_embs;
  std::vector<double> loss_history;  // summed BCE per epoch, before the step
  double final_loss = 0.0;           // summed BCE over all pairs after training
};

/// Jointly fits a one-layer convolution encoder and P to the original
/// incidence matrix by minimizing the summed binary cross-entropy.
TrainedDecoder train_decoder(const Hypergraph& g, const Matrix& x, const DecoderConfig& config);

/// Node and hyperedge embeddings of `encoder` on `g`.
LayerOutput encode(const HGConvLayer& encoder, Tape& tape, const Hypergraph& g, const Matrix& x);

enum class AttachmentVariant { DecoderArgmax, Random, ClosestNode, ClosestHyperedge };

std::string to_string(AttachmentVariant v);
AttachmentVariant parse_variant(const std::string& text);

struct AttachContext {
  const Hypergraph& graph;  // original hypergraph
  const Matrix& node_embs;
  const Matrix& edge_embs;
  const DecoderParams* decoder = nullptr;  // required for DecoderArgmax
};

/// Ties resolve to the smallest id. `rng` is used only by Random.
Index attach(AttachmentVariant variant, const AttachContext& ctx, const RowVector& generated, Rng& rng);

enum class FeatureSpace { Raw, Embedding };

std::string to_string(FeatureSpace s);
FeatureSpace parse_feature_space(const std::string& text);

struct ExpandInput {
  const Hypergraph& graph;
  const Matrix& features;  // raw classifier features of the original nodes
  std::span<const Index> labels;
  const Split& split;
};

struct ExpandResult {
  Hypergraph graph;
  Matrix features;
  std::vector<Index> labels;
  Split split;
  AugmentationPlan plan;  // with attached hyperedge ids filled in
};

/// Appends every plan entry as a degree-1 node. All attachments are scored
/// against the original hyperedge embeddings; new nodes join train only.
ExpandResult expand(const ExpandInput& input, AugmentationPlan plan, AttachmentVariant variant,
                    const TrainedDecoder& trained, FeatureSpace space, std::uint64_t seed);

}  // namespace hypersmote
