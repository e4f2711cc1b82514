#include "hypersmote/hgconv.hpp"

#include <stdexcept>
#include <string>

#include "hypersmote/metrics.hpp"

namespace hypersmote {

HGConvLayer HGConvLayer::init(Index in_dim, Index out_dim, Rng& rng) {
  HGConvLayer layer;
  layer.w1 = Linear::init(in_dim, out_dim, false, rng);
  layer.w2 = Linear::init(out_dim, out_dim, false, rng);
  return layer;
}

Var edge_step(const HGConvLayer& layer, const Hypergraph& g, Var x) {
  if (x.rows() != g.num_nodes()) {
    throw std::invalid_argument("edge_step: feature rows (" + std::to_string(x.rows()) + ") != node count (" +
                                std::to_string(g.num_nodes()) + ")");
  }
  return group_mean(relu(apply(layer.w1, x)), g.members(), EmptyGroup::Throw);
}

Var node_step(const HGConvLayer& layer, const Hypergraph& g, Var edge_emb) {
  if (edge_emb.rows() != g.num_hyperedges()) throw std::invalid_argument("node_step: edge rows != hyperedge count");
  return group_mean(relu(apply(layer.w2, edge_emb)), g.incident(), EmptyGroup::Zero);
}

LayerOutput conv(const HGConvLayer& layer, const Hypergraph& g, Var x) {
  Var e = edge_step(layer, g, x);
  return {e, node_step(layer, g, e)};
}

ClassifierModel ClassifierModel::init(Index in_dim, Index num_classes, const ClassifierConfig& config, Rng& rng) {
  if (config.num_layers < 1) throw std::invalid_argument("classifier needs at least one convolution layer");
  if (num_classes < 2) throw std::invalid_argument("classifier needs at least two classes");
  ClassifierModel model;
  Index dim = in_dim;
  for (int l = 0; l < config.num_layers; ++l) {
    model.layers.push_back(HGConvLayer::init(dim, config.hidden_dim, rng));
    dim = config.hidden_dim;
  }
  model.head = Linear::init(dim, num_classes, true, rng);
  return model;
}

std::vector<Matrix*> ClassifierModel::parameters() {
  std::vector<Matrix*> out;
  for (auto& layer : layers) {
    out.push_back(&layer.w1.weight);
    out.push_back(&layer.w2.weight);
  }
  out.push_back(&head.weight);
  out.push_back(&head.bias);
  return out;
}

std::vector<const Matrix*> ClassifierModel::parameters() const {
  std::vector<const Matrix*> out;
  for (Matrix* p : const_cast<ClassifierModel*>(this)->parameters()) out.push_back(p);
  return out;
}

ForwardResult forward(const ClassifierModel& model, Tape& tape, const Hypergraph& g, const Matrix& x, double dropout,
                      Rng* rng) {
  if (x.cols() != model.in_dim()) throw std::invalid_argument("forward: feature width does not match model input");
  Var h = tape.constant(x);
  for (const auto& layer : model.layers) {
    h = conv(layer, g, h).nodes;
    if (rng) h = hypersmote::dropout(h, dropout, *rng);
  }
  return {apply(model.head, h), h};
}

Matrix predict_logits(const ClassifierModel& model, const Hypergraph& g, const Matrix& x) {
  Tape tape;
  return forward(model, tape, g, x).logits.value();
}

std::vector<Index> argmax_rows(const Matrix& logits) {
  std::vector<Index> out(static_cast<std::size_t>(logits.rows()));
  for (Index r = 0; r < logits.rows(); ++r) {
    Index best = 0;
    logits.row(r).maxCoeff(&best);
    out[r] = best;
  }
  return out;
}

namespace {

std::vector<Index> gather(std::span<const Index> values, std::span<const Index> rows) {
  std::vector<Index> out;
  out.reserve(rows.size());
  for (Index r : rows) out.push_back(values[r]);
  return out;
}

void validate_split(const Split& split, Index num_nodes) {
  if (split.train.empty()) throw std::invalid_argument("train_classifier: empty training split");
  std::vector<char> seen(static_cast<std::size_t>(num_nodes), 0);
  for (const auto* part : {&split.train, &split.val, &split.test}) {
    for (Index i : *part) {
      if (i < 0 || i >= num_nodes) throw std::out_of_range("split index out of range");
      if (seen[i]++) throw std::invalid_argument("split parts overlap at node " + std::to_string(i));
    }
  }
}

}  // namespace

TrainResult train_classifier(const Hypergraph& g, const Matrix& x, std::span<const Index> labels, Index num_classes,
                             const Split& split, const TrainConfig& config) {
  Rng rng(config.seed);
  return train_classifier(ClassifierModel::init(x.cols(), num_classes, config.model, rng), g, x, labels, split,
                          config);
}

TrainResult train_classifier(ClassifierModel model, const Hypergraph& g, const Matrix& x,
                             std::span<const Index> labels, const Split& split, const TrainConfig& config) {
  validate_split(split, g.num_nodes());
  if (static_cast<Index>(labels.size()) != g.num_nodes()) throw std::invalid_argument("label count != node count");

  // Dropout stream is separate from the init stream so both stay stable.
  Rng rng(config.seed ^ 0x9E3779B97F4A7C15ull);
  Adam adam(AdamConfig{.lr = config.lr});
  const Index classes = model.num_classes();
  const auto train_truth = gather(labels, split.train);
  const auto val_truth = gather(labels, split.val);

  TrainResult result;
  result.model = model;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Tape tape;
    auto out = forward(model, tape, g, x, config.model.dropout, &rng);
    Var loss = softmax_ce_loss(out.logits, labels, split.train);
    tape.backward(loss);

    auto params = model.parameters();
    std::vector<ParamSlot> slots;
    std::vector<Matrix> grads;
    for (std::size_t i = 0; i < params.size(); ++i) {
      // Weight decay on weights only, not on the head bias.
      const bool is_bias = i + 1 == params.size();
      slots.push_back({params[i], is_bias ? 0.0 : config.weight_decay});
      grads.push_back(tape.grad(*params[i]));
    }
    adam.step(slots, grads);

    const auto pred = argmax_rows(predict_logits(model, g, x));
    EpochRecord rec{epoch, loss.scalar(), accuracy(gather(pred, split.train), train_truth), 0.0, 0.0};
    if (!split.val.empty()) {
      const auto val_pred = gather(pred, split.val);
      rec.val_accuracy = accuracy(val_pred, val_truth);
      rec.val_macro_f1 = macro_f1(val_pred, val_truth, classes);
      if (rec.val_macro_f1 > result.best_val_macro_f1) {
        result.best_val_macro_f1 = rec.val_macro_f1;
        result.best_epoch = epoch;
        result.model = model;
      }
    } else {
      result.best_epoch = epoch;
      result.model = model;
    }
    result.history.push_back(rec);
  }
  return result;
}

}  // namespace hypersmote
