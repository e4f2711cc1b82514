#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "hypersmote/hypergraph.hpp"
#include "hypersmote/tensor.hpp"

namespace hypersmote::testing {

/// Largest relative error between the taped gradient and central finite
/// differences, over every entry of every parameter.
///
/// `loss` must register each matrix in `params` with tape.param() and return a
/// 1x1 Var.
inline double gradcheck(const std::function<Var(Tape&)>& loss, const std::vector<Matrix*>& params,
                        double h = 1e-5) {
  Tape tape;
  tape.backward(loss(tape));
  std::vector<Matrix> analytic;
  for (Matrix* p : params) analytic.push_back(tape.grad(*p));

  auto eval = [&] {
    Tape t;
    return loss(t).scalar();
  };

  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& p = *params[k];
    for (Index i = 0; i < p.size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + h;
      const double up = eval();
      p.data()[i] = saved - h;
      const double down = eval();
      p.data()[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[k].data()[i];
      const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(a - numeric) / scale);
    }
  }
  return worst;
}

inline Matrix random_matrix(Index rows, Index cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

/// Entries bounded away from zero so relu kinks stay outside the FD stencil.
inline Matrix random_nonzero(Index rows, Index cols, Rng& rng) {
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = sign(rng) ? mag(rng) : -mag(rng);
  return m;
}

/// Every node sits in at least one hyperedge unless `allow_isolated`.
inline Hypergraph random_hypergraph(Index num_nodes, Index num_edges, Index max_size, Rng& rng,
                                    bool allow_isolated = false) {
  std::uniform_int_distribution<Index> node(0, num_nodes - 1), size(1, max_size);
  std::vector<std::vector<Index>> edges(static_cast<std::size_t>(num_edges));
  for (auto& e : edges) {
    for (Index k = size(rng); k > 0; --k) e.push_back(node(rng));
  }
  if (!allow_isolated) {
    std::uniform_int_distribution<std::size_t> edge(0, edges.size() - 1);
    for (Index v = 0; v < num_nodes; ++v) edges[edge(rng)].push_back(v);
  }
  return Hypergraph::build(num_nodes, edges);
}

}  // namespace hypersmote::testing
