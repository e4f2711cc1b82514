#include "hypersmote/expansion.hpp"

#include <limits>
#include <stdexcept>

namespace hypersmote {

double decoder_score(const DecoderParams& dec, const RowVector& node_emb, const RowVector& edge_emb) {
  if (dec.p.rows() != node_emb.size() || dec.p.cols() != edge_emb.size()) {
    throw std::invalid_argument("decoder_score: embedding dimension does not match P");
  }
  Matrix z(1, 1);
  z(0, 0) = node_emb * dec.p * edge_emb.transpose();
  return sigmoid(z)(0, 0);
}

Matrix decode_incidence(const DecoderParams& dec, const Matrix& node_embs, const Matrix& edge_embs) {
  Matrix logits = (edge_embs * dec.p.transpose()) * node_embs.transpose();
  return sigmoid(logits);
}

LayerOutput encode(const HGConvLayer& encoder, Tape& tape, const Hypergraph& g, const Matrix& x) {
  return conv(encoder, g, tape.constant(x));
}

namespace {

Matrix dense_incidence(const Hypergraph& g) {
  Matrix h = Matrix::Zero(g.num_hyperedges(), g.num_nodes());
  for (Index e = 0; e < g.num_hyperedges(); ++e) {
    for (Index v : g.members(e)) h(e, v) = 1.0;
  }
  return h;
}

Matrix negative_mask(const Hypergraph& g, const Matrix& h, double ratio, Rng& rng) {
  Matrix mask = h;
  const auto wanted = static_cast<Index>(ratio * static_cast<double>(g.num_pins()));
  std::uniform_int_distribution<Index> pick_e(0, g.num_hyperedges() - 1);
  std::uniform_int_distribution<Index> pick_v(0, g.num_nodes() - 1);
  const Index available = h.size() - g.num_pins();
  Index drawn = 0;
  for (Index tries = 0; drawn < std::min(wanted, available) && tries < 20 * wanted + 100; ++tries) {
    const Index e = pick_e(rng), v = pick_v(rng);
    if (mask(e, v) != 0.0) continue;
    mask(e, v) = 1.0;
    ++drawn;
  }
  return mask;
}

// sigmoid(E_e P^T E_v^T) equals sigmoid(E_v P E_e) transposed into |E| x |V|.
Var decoder_probs(Var node_embs, Var edge_embs, Var p) {
  return sigmoid(matmul(matmul(edge_embs, transpose(p)), transpose(node_embs)));
}

}  // namespace

TrainedDecoder train_decoder(const Hypergraph& g, const Matrix& x, const DecoderConfig& config) {
  if (g.num_hyperedges() < 1) throw std::invalid_argument("train_decoder: hypergraph has no hyperedges");
  if (x.rows() != g.num_nodes()) throw std::invalid_argument("train_decoder: feature rows != node count");

  Rng rng(config.seed);
  TrainedDecoder out;
  out.encoder = HGConvLayer::init(x.cols(), config.hidden_dim, rng);
  out.decoder.p = Linear::init(config.hidden_dim, config.hidden_dim, false, rng).weight;

  const Matrix h = dense_incidence(g);
  Adam adam(AdamConfig{.lr = config.lr});
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Tape tape;
    auto emb = encode(out.encoder, tape, g, x);
    Var probs = decoder_probs(emb.nodes, emb.edges, tape.param(out.decoder.p));
    Matrix mask;
    if (config.negative_ratio > 0.0) mask = negative_mask(g, h, config.negative_ratio, rng);
    Var loss = bce_loss(probs, h, mask.size() ? &mask : nullptr);
    tape.backward(loss);
    out.loss_history.push_back(loss.scalar());

    const ParamSlot slots[] = {{&out.encoder.w1.weight}, {&out.encoder.w2.weight}, {&out.decoder.p}};
    const Matrix grads[] = {tape.grad(out.encoder.w1.weight), tape.grad(out.encoder.w2.weight),
                            tape.grad(out.decoder.p)};
    adam.step(slots, grads);
  }

  Tape tape;
  auto emb = encode(out.encoder, tape, g, x);
  out.node_embs = emb.nodes.value();
  out.edge_embs = emb.edges.value();
  out.final_loss = bce_loss(decode_incidence(out.decoder, out.node_embs, out.edge_embs), h);
  return out;
}

std::string to_string(AttachmentVariant v) {
  switch (v) {
    case AttachmentVariant::DecoderArgmax: return "decoder";
    case AttachmentVariant::Random: return "random";
    case AttachmentVariant::ClosestNode: return "closest-node";
    case AttachmentVariant::ClosestHyperedge: return "closest-hyperedge";
  }
  return "unknown";
}

AttachmentVariant parse_variant(const std::string& text) {
  for (auto v : {AttachmentVariant::DecoderArgmax, AttachmentVariant::Random, AttachmentVariant::ClosestNode,
                 AttachmentVariant::ClosestHyperedge}) {
    if (text == to_string(v)) return v;
  }
  throw std::invalid_argument("unknown attachment variant '" + text +
                              "' (expected decoder, random, closest-node, closest-hyperedge)");
}

std::string to_string(FeatureSpace s) { return s == FeatureSpace::Raw ? "raw" : "embedding"; }

FeatureSpace parse_feature_space(const std::string& text) {
  if (text == "raw") return FeatureSpace::Raw;
  if (text == "embedding") return FeatureSpace::Embedding;
  throw std::invalid_argument("unknown feature space '" + text + "' (expected raw or embedding)");
}

namespace {

Index argmin_distance(const Matrix& rows, const RowVector& q, const std::vector<char>* eligible = nullptr) {
  Index best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < rows.rows(); ++i) {
    if (eligible && !(*eligible)[i]) continue;
    const double d = (rows.row(i) - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

Index attach(AttachmentVariant variant, const AttachContext& ctx, const RowVector& generated, Rng& rng) {
  const Index num_edges = ctx.graph.num_hyperedges();
  if (num_edges == 0) throw std::invalid_argument("attach: hypergraph has no hyperedges");
  if (ctx.edge_embs.rows() != num_edges) throw std::invalid_argument("attach: edge embeddings missing");

  switch (variant) {
    case AttachmentVariant::DecoderArgmax: {
      if (!ctx.decoder) throw std::invalid_argument("attach: decoder variant needs a trained decoder");
      Index best = 0;
      double best_s = -1.0;
      for (Index e = 0; e < num_edges; ++e) {
        const double s = decoder_score(*ctx.decoder, generated, ctx.edge_embs.row(e));
        if (s > best_s) {
          best_s = s;
          best = e;
        }
      }
      return best;
    }
    case AttachmentVariant::Random:
      return std::uniform_int_distribution<Index>(0, num_edges - 1)(rng);
    case AttachmentVariant::ClosestNode: {
      if (ctx.node_embs.rows() != ctx.graph.num_nodes()) throw std::invalid_argument("attach: node embeddings missing");
      std::vector<char> eligible(static_cast<std::size_t>(ctx.graph.num_nodes()));
      for (Index v = 0; v < ctx.graph.num_nodes(); ++v) eligible[v] = ctx.graph.node_degree(v) > 0;
      const Index nearest = argmin_distance(ctx.node_embs, generated, &eligible);
      return ctx.graph.incident(nearest).front();
    }
    case AttachmentVariant::ClosestHyperedge:
      return argmin_distance(ctx.edge_embs, generated);
  }
  throw std::logic_error("attach: unhandled variant");
}

ExpandResult expand(const ExpandInput& input, AugmentationPlan plan, AttachmentVariant variant,
                    const TrainedDecoder& trained, FeatureSpace space, std::uint64_t seed) {
  if (plan.entries.empty()) throw std::invalid_argument("expand: empty plan");
  const Index n = input.graph.num_nodes();
  const Matrix& base = space == FeatureSpace::Raw ? input.features : trained.node_embs;
  if (base.rows() != n) throw std::invalid_argument("expand: feature rows != node count");

  AttachContext ctx{input.graph, trained.node_embs, trained.edge_embs, &trained.decoder};
  Rng rng(seed);
  std::vector<Index> targets;
  targets.reserve(plan.entries.size());
  for (auto& entry : plan.entries) {
    entry.hyperedge = attach(variant, ctx, entry.embedding, rng);
    targets.push_back(entry.hyperedge);
  }

  ExpandResult out;
  out.graph = append_nodes(input.graph, targets);
  const auto added = static_cast<Index>(plan.entries.size());
  out.features.resize(n + added, base.cols());
  out.features.topRows(n) = base;
  out.labels.assign(input.labels.begin(), input.labels.end());
  out.split = input.split;
  for (Index k = 0; k < added; ++k) {
    const auto& entry = plan.entries[k];
    const RowVector& row = space == FeatureSpace::Raw ? entry.features : entry.embedding;
    if (row.size() != base.cols()) throw std::invalid_argument("expand: plan feature width does not match bundle");
    out.features.row(n + k) = row;
    out.labels.push_back(entry.label);
    out.split.train.push_back(n + k);
  }
  out.plan = std::move(plan);
  return out;
}

}  // namespace hypersmote
