#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "hypersmote/hypergraph.hpp"

namespace hypersmote {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Matrix = MatrixX<double>;
using RowVector = RowVectorX<double>;
using Rng = std::mt19937_64;

inline constexpr double kProbClamp = 1e-12;

enum class EmptyGroup { Throw, Zero };

// ---------------------------------------------------------------------------
// Value-level kernels. These are the reference forms the taped ops reuse.
// ---------------------------------------------------------------------------

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw std::domain_error(std::string(what) + ": non-finite entry");
}

template <typename Derived>
MatrixX<typename Derived::Scalar> relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(typename Derived::Scalar(0));
}

template <typename Derived>
MatrixX<typename Derived::Scalar> sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  // Split on sign so exp never overflows.
  return x.unaryExpr([](S z) {
    if (z >= S(0)) return S(1) / (S(1) + std::exp(-z));
    const S ez = std::exp(z);
    return ez / (S(1) + ez);
  });
}

/// Output row g is the mean of the input rows listed in group g.
template <typename Derived>
MatrixX<typename Derived::Scalar> group_mean(const Eigen::MatrixBase<Derived>& rows, const IndexGroups& groups,
                                             EmptyGroup empty = EmptyGroup::Throw) {
  using S = typename Derived::Scalar;
  MatrixX<S> out = MatrixX<S>::Zero(groups.size(), rows.cols());
  for (Index g = 0; g < groups.size(); ++g) {
    auto members = groups[g];
    if (members.empty()) {
      if (empty == EmptyGroup::Throw) throw std::invalid_argument("group_mean: empty group " + std::to_string(g));
      continue;
    }
    for (Index i : members) {
      if (i < 0 || i >= rows.rows()) throw std::out_of_range("group_mean: row index out of range");
      out.row(g) += rows.row(i);
    }
    out.row(g) /= static_cast<S>(members.size());
  }
  return out;
}

/// Summed binary cross-entropy, predictions clamped to [1e-12, 1 - 1e-12].
/// A non-empty mask restricts the sum to entries where mask != 0.
template <typename DP, typename DT>
typename DP::Scalar bce_loss(const Eigen::MatrixBase<DP>& pred, const Eigen::MatrixBase<DT>& target,
                             const Matrix* mask = nullptr) {
  using S = typename DP::Scalar;
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("bce_loss: shape mismatch");
  }
  S loss = 0;
  for (Index r = 0; r < pred.rows(); ++r) {
    for (Index c = 0; c < pred.cols(); ++c) {
      if (mask && (*mask)(r, c) == 0) continue;
      const S p = std::clamp(pred(r, c), S(kProbClamp), S(1 - kProbClamp));
      const S t = target(r, c);
      // Zero-weight terms are skipped; with binary targets only one log runs.
      if (t != S(0)) loss -= t * std::log(p);
      if (t != S(1)) loss -= (S(1) - t) * std::log(S(1) - p);
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Reverse-mode tape.
// ---------------------------------------------------------------------------

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  double scalar() const;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Var constant(Matrix value);

  /// Leaf tracked by address: registering the same matrix twice returns the
  /// same Var, and grad(param) looks it up after backward().
  Var param(const Matrix& param);

  Var record(Matrix value, std::vector<std::size_t> parents, BackwardFn backward);

  void backward(Var loss);

  const Matrix& value(std::size_t id) const { return nodes_.at(id).value; }
  Matrix& grad(std::size_t id) { return nodes_.at(id).grad; }
  const Matrix& grad(Var v) const { return nodes_.at(v.id).grad; }

  /// Gradient for a registered parameter, zeros when it never reached the tape.
  Matrix grad(const Matrix& param) const;

  bool needs_grad(std::size_t id) const { return nodes_.at(id).needs_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    bool needs_grad = false;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Matrix*, std::size_t> params_;
  bool backward_done_ = false;
};

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var add_row(Var x, Var row);  // broadcasts a 1 x C row over every row of x
Var relu(Var x);
Var sigmoid(Var x);
Var group_mean(Var rows, const IndexGroups& groups, EmptyGroup empty = EmptyGroup::Throw);
Var dropout(Var x, double rate, Rng& rng);
Var sum(Var x);
Var bce_loss(Var pred, const Matrix& target, const Matrix* mask = nullptr);

/// Mean cross-entropy over `rows` (all rows when empty is not allowed: the
/// caller passes the training subset). Max-subtracted log-sum-exp.
Var softmax_ce_loss(Var logits, std::span<const Index> labels, std::span<const Index> rows);
double softmax_ce_loss(const Matrix& logits, std::span<const Index> labels, std::span<const Index> rows);

// ---------------------------------------------------------------------------
// Parameters and optimizer.
// ---------------------------------------------------------------------------

struct Linear {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out, or empty

  Index in_dim() const { return weight.rows(); }
  Index out_dim() const { return weight.cols(); }
  bool has_bias() const { return bias.size() > 0; }

  /// uniform(-sqrt(1/in), +sqrt(1/in)) weights, zero bias.
  static Linear init(Index in, Index out, bool with_bias, Rng& rng);
};

Var apply(const Linear& layer, Var x);

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct ParamSlot {
  Matrix* value;
  double weight_decay = 0.0;  // L2 term added to the gradient
};

class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<const ParamSlot> params, std::span<const Matrix> grads);
  long steps() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

}  // namespace hypersmote
