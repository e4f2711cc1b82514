#include "hypersmote/tensor.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace hypersmote {

const Matrix& Var::value() const { return tape->value(id); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw std::logic_error("Var::scalar on non-scalar value");
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  require_finite(value, "Tape::constant");
  Node node;
  node.grad = Matrix::Zero(value.rows(), value.cols());
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Var Tape::param(const Matrix& param) {
  if (auto it = params_.find(&param); it != params_.end()) return {this, it->second};
  Var v = constant(param);
  nodes_[v.id].needs_grad = true;
  params_.emplace(&param, v.id);
  return v;
}

Var Tape::record(Matrix value, std::vector<std::size_t> parents, BackwardFn backward) {
  bool needs = false;
  for (std::size_t p : parents) needs = needs || nodes_.at(p).needs_grad;
  Node node;
  node.grad = Matrix::Zero(value.rows(), value.cols());
  node.value = std::move(value);
  node.parents = std::move(parents);
  node.needs_grad = needs;
  if (needs) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

void Tape::backward(Var loss) {
  if (loss.tape != this || loss.id >= nodes_.size()) throw std::logic_error("backward: loss not recorded on this tape");
  const Matrix& lv = nodes_[loss.id].value;
  if (lv.rows() != 1 || lv.cols() != 1) throw std::logic_error("backward: loss must be a 1x1 scalar");
  if (backward_done_) throw std::logic_error("backward: tape already consumed");
  backward_done_ = true;

  nodes_[loss.id].grad(0, 0) = 1.0;
  // Nodes are appended in evaluation order, so reverse index order is a
  // valid reverse topological order.
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this, i);
  }
}

Matrix Tape::grad(const Matrix& param) const {
  if (auto it = params_.find(&param); it != params_.end()) return nodes_[it->second].grad;
  return Matrix::Zero(param.rows(), param.cols());
}

namespace {

void check_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw std::logic_error("operands recorded on different tapes");
}

}  // namespace

Var matmul(Var a, Var b) {
  check_same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: shape mismatch " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " * " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix out = a.value() * b.value();
  return a.tape->record(std::move(out), {a.id, b.id}, [ia = a.id, ib = b.id](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia).noalias() += g * t.value(ib).transpose();
    if (t.needs_grad(ib)) t.grad(ib).noalias() += t.value(ia).transpose() * g;
  });
}

Var transpose(Var a) {
  Matrix out = a.value().transpose();
  return a.tape->record(std::move(out), {a.id}, [ia = a.id](Tape& t, std::size_t self) {
    t.grad(ia) += t.grad(self).transpose();
  });
}

Var add(Var a, Var b) {
  check_same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("add: shape mismatch");
  Matrix out = a.value() + b.value();
  return a.tape->record(std::move(out), {a.id, b.id}, [ia = a.id, ib = b.id](Tape& t, std::size_t self) {
    if (t.needs_grad(ia)) t.grad(ia) += t.grad(self);
    if (t.needs_grad(ib)) t.grad(ib) += t.grad(self);
  });
}

Var add_row(Var x, Var row) {
  check_same_tape(x, row);
  if (row.rows() != 1 || row.cols() != x.cols()) throw std::invalid_argument("add_row: bias shape mismatch");
  Matrix out = x.value().rowwise() + row.value().row(0);
  return x.tape->record(std::move(out), {x.id, row.id}, [ix = x.id, ir = row.id](Tape& t, std::size_t self) {
    if (t.needs_grad(ix)) t.grad(ix) += t.grad(self);
    if (t.needs_grad(ir)) t.grad(ir) += t.grad(self).colwise().sum();
  });
}

Var relu(Var x) {
  Matrix out = relu(x.value());
  return x.tape->record(std::move(out), {x.id}, [ix = x.id](Tape& t, std::size_t self) {
    t.grad(ix).array() += t.grad(self).array() * (t.value(ix).array() > 0.0).cast<double>();
  });
}

Var sigmoid(Var x) {
  Matrix out = sigmoid(x.value());
  return x.tape->record(std::move(out), {x.id}, [ix = x.id](Tape& t, std::size_t self) {
    const Matrix& s = t.value(self);
    t.grad(ix).array() += t.grad(self).array() * s.array() * (1.0 - s.array());
  });
}

Var group_mean(Var rows, const IndexGroups& groups, EmptyGroup empty) {
  Matrix out = group_mean(rows.value(), groups, empty);
  // Groups are captured by value: callers may pass temporaries.
  return rows.tape->record(std::move(out), {rows.id}, [ir = rows.id, groups](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix& dst = t.grad(ir);
    for (Index k = 0; k < groups.size(); ++k) {
      auto members = groups[k];
      if (members.empty()) continue;
      const double w = 1.0 / static_cast<double>(members.size());
      for (Index i : members) dst.row(i) += w * g.row(k);
    }
  });
}

Var dropout(Var x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must lie in [0, 1)");
  if (rate == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  Matrix mask(x.rows(), x.cols());
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? scale : 0.0;
  Matrix out = x.value().cwiseProduct(mask);
  return x.tape->record(std::move(out), {x.id}, [ix = x.id, mask = std::move(mask)](Tape& t, std::size_t self) {
    t.grad(ix) += t.grad(self).cwiseProduct(mask);
  });
}

Var sum(Var x) {
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  return x.tape->record(std::move(out), {x.id}, [ix = x.id](Tape& t, std::size_t self) {
    t.grad(ix).array() += t.grad(self)(0, 0);
  });
}

Var bce_loss(Var pred, const Matrix& target, const Matrix* mask) {
  if (mask && (mask->rows() != target.rows() || mask->cols() != target.cols())) {
    throw std::invalid_argument("bce_loss: mask shape mismatch");
  }
  Matrix out(1, 1);
  out(0, 0) = bce_loss(pred.value(), target, mask);
  Matrix mask_copy = mask ? *mask : Matrix();
  return pred.tape->record(std::move(out), {pred.id},
                           [ip = pred.id, target, mask_copy = std::move(mask_copy)](Tape& t, std::size_t self) {
                             const double g = t.grad(self)(0, 0);
                             const Matrix& p = t.value(ip);
                             Matrix& dst = t.grad(ip);
                             for (Index r = 0; r < p.rows(); ++r) {
                               for (Index c = 0; c < p.cols(); ++c) {
                                 if (mask_copy.size() && mask_copy(r, c) == 0) continue;
                                 const double raw = p(r, c);
                                 // Clamped region is flat.
                                 if (raw < kProbClamp || raw > 1 - kProbClamp) continue;
                                 const double tv = target(r, c);
                                 dst(r, c) += g * (-tv / raw + (1.0 - tv) / (1.0 - raw));
                               }
                             }
                           });
}

namespace {

void validate_ce(const Matrix& logits, std::span<const Index> labels, std::span<const Index> rows) {
  if (rows.empty()) throw std::invalid_argument("softmax_ce_loss: no rows selected");
  if (static_cast<Index>(labels.size()) != logits.rows()) {
    throw std::invalid_argument("softmax_ce_loss: label count does not match logits rows");
  }
  for (Index r : rows) {
    if (r < 0 || r >= logits.rows()) throw std::out_of_range("softmax_ce_loss: row index out of range");
    if (labels[r] < 0 || labels[r] >= logits.cols()) throw std::out_of_range("softmax_ce_loss: label out of range");
  }
}

// Row-wise softmax of the selected rows; returns the mean loss.
double softmax_rows(const Matrix& logits, std::span<const Index> labels, std::span<const Index> rows,
                    Matrix* probs) {
  double loss = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    auto z = logits.row(rows[k]);
    const double m = z.maxCoeff();
    RowVector e = (z.array() - m).exp();
    const double s = e.sum();
    loss += -(z(labels[rows[k]]) - m - std::log(s));
    if (probs) probs->row(static_cast<Index>(k)) = e / s;
  }
  return loss / static_cast<double>(rows.size());
}

}  // namespace

double softmax_ce_loss(const Matrix& logits, std::span<const Index> labels, std::span<const Index> rows) {
  validate_ce(logits, labels, rows);
  return softmax_rows(logits, labels, rows, nullptr);
}

Var softmax_ce_loss(Var logits, std::span<const Index> labels, std::span<const Index> rows) {
  validate_ce(logits.value(), labels, rows);
  Matrix probs(static_cast<Index>(rows.size()), logits.cols());
  Matrix out(1, 1);
  out(0, 0) = softmax_rows(logits.value(), labels, rows, &probs);

  std::vector<Index> row_copy(rows.begin(), rows.end());
  std::vector<Index> label_copy;
  label_copy.reserve(rows.size());
  for (Index r : rows) label_copy.push_back(labels[r]);

  return logits.tape->record(
      std::move(out), {logits.id},
      [il = logits.id, probs = std::move(probs), row_copy = std::move(row_copy),
       label_copy = std::move(label_copy)](Tape& t, std::size_t self) {
        const double g = t.grad(self)(0, 0) / static_cast<double>(row_copy.size());
        Matrix& dst = t.grad(il);
        for (std::size_t k = 0; k < row_copy.size(); ++k) {
          RowVector d = probs.row(static_cast<Index>(k));
          d(label_copy[k]) -= 1.0;
          dst.row(row_copy[k]) += g * d;
        }
      });
}

Linear Linear::init(Index in, Index out, bool with_bias, Rng& rng) {
  if (in <= 0 || out <= 0) throw std::invalid_argument("Linear::init: dimensions must be positive");
  const double bound = std::sqrt(1.0 / static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Linear layer;
  layer.weight.resize(in, out);
  for (Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = dist(rng);
  if (with_bias) layer.bias = Matrix::Zero(1, out);
  return layer;
}

Var apply(const Linear& layer, Var x) {
  Var y = matmul(x, x.tape->param(layer.weight));
  if (layer.has_bias()) y = add_row(y, x.tape->param(layer.bias));
  return y;
}

void Adam::step(std::span<const ParamSlot> params, std::span<const Matrix> grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("Adam::step: parameter/gradient count mismatch");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Adam::step: parameter set changed between steps");
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& w = *params[i].value;
    if (grads[i].rows() != w.rows() || grads[i].cols() != w.cols() || m_[i].rows() != w.rows() ||
        m_[i].cols() != w.cols()) {
      throw std::invalid_argument("Adam::step: shape mismatch at parameter " + std::to_string(i));
    }
    Matrix g = grads[i];
    if (params[i].weight_decay != 0.0) g += params[i].weight_decay * w;
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseProduct(g);
    w.array() -= config_.lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + config_.eps);
  }
}

}  // namespace hypersmote
