#include "hypersmote/hypergraph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hypersmote {

Hypergraph Hypergraph::build(Index num_nodes, const std::vector<std::vector<Index>>& hyperedges) {
  if (num_nodes < 0) throw std::invalid_argument("negative node count");
  if (hyperedges.empty()) throw std::invalid_argument("hyperedge list is empty");

  Hypergraph g;
  g.num_nodes_ = num_nodes;
  g.members_.offsets.reserve(hyperedges.size() + 1);
  std::vector<Index> scratch;
  for (std::size_t e = 0; e < hyperedges.size(); ++e) {
    const auto& edge = hyperedges[e];
    if (edge.empty()) {
      throw std::invalid_argument("hyperedge " + std::to_string(e) + " has no members");
    }
    scratch.assign(edge.begin(), edge.end());
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    if (scratch.front() < 0 || scratch.back() >= num_nodes) {
      throw std::invalid_argument("hyperedge " + std::to_string(e) + " references node out of range [0, " +
                                  std::to_string(num_nodes) + ")");
    }
    g.members_.push_back(scratch);
  }
  g.rebuild_incident();
  return g;
}

void Hypergraph::rebuild_incident() {
  std::vector<Index> degree(static_cast<std::size_t>(num_nodes_), 0);
  for (Index v : members_.indices) ++degree[v];

  incident_.offsets.assign(static_cast<std::size_t>(num_nodes_) + 1, 0);
  for (Index v = 0; v < num_nodes_; ++v) incident_.offsets[v + 1] = incident_.offsets[v] + degree[v];
  incident_.indices.assign(members_.indices.size(), 0);

  std::vector<Index> cursor(incident_.offsets.begin(), incident_.offsets.end() - 1);
  for (Index e = 0; e < members_.size(); ++e) {
    for (Index v : members_[e]) incident_.indices[cursor[v]++] = e;
  }
}

bool Hypergraph::contains(Index e, Index v) const {
  auto row = members(e);
  return std::binary_search(row.begin(), row.end(), v);
}

std::vector<Index> Hypergraph::singleton_edges() const {
  std::vector<Index> out;
  for (Index e = 0; e < num_hyperedges(); ++e) {
    if (edge_size(e) < 2) out.push_back(e);
  }
  return out;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> Hypergraph::incidence() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(members_.indices.size());
  for (Index e = 0; e < num_hyperedges(); ++e) {
    for (Index v : members(e)) triplets.emplace_back(e, v, 1.0);
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> h(num_hyperedges(), num_nodes_);
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

NodeNeighborhood neighbors(const Hypergraph& g, Index v) {
  if (v < 0 || v >= g.num_nodes()) throw std::out_of_range("node id " + std::to_string(v) + " out of range");
  NodeNeighborhood hood{v, {}};
  for (Index e : g.incident(v)) {
    for (Index u : g.members(e)) {
      if (u != v) hood.neighbors.push_back(u);
    }
  }
  std::sort(hood.neighbors.begin(), hood.neighbors.end());
  hood.neighbors.erase(std::unique(hood.neighbors.begin(), hood.neighbors.end()), hood.neighbors.end());
  return hood;
}

Hypergraph append_node(const Hypergraph& g, Index attach_to) {
  const Index target[] = {attach_to};
  return append_nodes(g, target);
}

Hypergraph append_nodes(const Hypergraph& g, std::span<const Index> attach_to) {
  std::vector<std::vector<Index>> added(static_cast<std::size_t>(g.num_hyperedges()));
  Index next = g.num_nodes();
  for (Index e : attach_to) {
    if (e < 0 || e >= g.num_hyperedges()) {
      throw std::out_of_range("hyperedge id " + std::to_string(e) + " out of range");
    }
    added[e].push_back(next++);
  }

  std::vector<std::vector<Index>> edges(static_cast<std::size_t>(g.num_hyperedges()));
  for (Index e = 0; e < g.num_hyperedges(); ++e) {
    auto row = g.members(e);
    edges[e].assign(row.begin(), row.end());
    edges[e].insert(edges[e].end(), added[e].begin(), added[e].end());
  }
  return Hypergraph::build(next, edges);
}

}  // namespace hypersmote
