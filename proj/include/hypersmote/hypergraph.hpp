#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

namespace hypersmote {

using Index = std::int64_t;

/// Compressed list of index groups: group g holds indices[offsets[g], offsets[g+1]).
struct IndexGroups {
  std::vector<Index> offsets{0};
  std::vector<Index> indices;

  Index size() const { return static_cast<Index>(offsets.size()) - 1; }
  std::span<const Index> operator[](Index g) const {
    return {indices.data() + offsets[g], indices.data() + offsets[g + 1]};
  }
  Index group_size(Index g) const { return offsets[g + 1] - offsets[g]; }

  void push_back(std::span<const Index> group) {
    indices.insert(indices.end(), group.begin(), group.end());
    offsets.push_back(static_cast<Index>(indices.size()));
  }

  friend bool operator==(const IndexGroups&, const IndexGroups&) = default;
};

struct NodeNeighborhood {
  Index center = 0;
  std::vector<Index> neighbors;  // sorted ascending, never contains center
};

/// Binary incidence structure. Orientation is |E| x |V|: row e lists the
/// members of hyperedge e, column v lists the hyperedges incident to v.
/// Immutable once built; growth goes through append_node(s).
class Hypergraph {
 public:
  Hypergraph() = default;

  /// Member ids inside one hyperedge are deduplicated. Singleton hyperedges
  /// are accepted and reported through singleton_edges().
  static Hypergraph build(Index num_nodes, const std::vector<std::vector<Index>>& hyperedges);

  Index num_nodes() const { return num_nodes_; }
  Index num_hyperedges() const { return members_.size(); }
  Index num_pins() const { return static_cast<Index>(members_.indices.size()); }

  const IndexGroups& members() const { return members_; }
  const IndexGroups& incident() const { return incident_; }
  std::span<const Index> members(Index e) const { return members_[e]; }
  std::span<const Index> incident(Index v) const { return incident_[v]; }

  Index edge_size(Index e) const { return members_.group_size(e); }
  Index node_degree(Index v) const { return incident_.group_size(v); }

  bool contains(Index e, Index v) const;
  std::vector<Index> singleton_edges() const;

  /// Dense-shaped sparse view of H (|E| x |V|, entries 1.0).
  Eigen::SparseMatrix<double, Eigen::RowMajor> incidence() const;

  friend bool operator==(const Hypergraph&, const Hypergraph&) = default;

 private:
  void rebuild_incident();

  Index num_nodes_ = 0;
  IndexGroups members_;
  IndexGroups incident_;
};

NodeNeighborhood neighbors(const Hypergraph& g, Index v);

/// New hypergraph with one extra node whose only hyperedge is `attach_to`.
Hypergraph append_node(const Hypergraph& g, Index attach_to);

/// Equivalent to folding append_node over `attach_to`, in order.
Hypergraph append_nodes(const Hypergraph& g, std::span<const Index> attach_to);

}  // namespace hypersmote
