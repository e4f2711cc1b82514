#include <gtest/gtest.h>

#include <random>
#include <set>

#include "hypersmote/hypergraph.hpp"

using namespace hypersmote;

namespace {

Eigen::MatrixXd dense(const Hypergraph& g) { return Eigen::MatrixXd(g.incidence()); }

}  // namespace

TEST(Hypergraph, BuildsIncidenceRows) {
  auto g = Hypergraph::build(3, {{0, 1}, {1, 2}});
  Eigen::MatrixXd expected(2, 3);
  expected << 1, 1, 0, 0, 1, 1;
  EXPECT_EQ(dense(g), expected);
  EXPECT_EQ(g.num_pins(), 4);
}

TEST(Hypergraph, CountsDegrees) {
  auto g = Hypergraph::build(2, {{0}, {0, 1}});
  EXPECT_EQ(g.edge_size(0), 1);
  EXPECT_EQ(g.edge_size(1), 2);
  EXPECT_EQ(g.node_degree(0), 2);
  EXPECT_EQ(g.node_degree(1), 1);
  EXPECT_EQ(g.singleton_edges(), std::vector<Index>{0});
}

TEST(Hypergraph, SingleHyperedgeGivesUnitDegrees) {
  auto g = Hypergraph::build(4, {{0, 1, 2, 3}});
  for (Index v = 0; v < 4; ++v) EXPECT_EQ(g.node_degree(v), 1);
}

TEST(Hypergraph, DeduplicatesAndSortsMembers) {
  auto g = Hypergraph::build(4, {{3, 1, 3, 0}});
  auto m = g.members(0);
  EXPECT_EQ(std::vector<Index>(m.begin(), m.end()), (std::vector<Index>{0, 1, 3}));
  EXPECT_TRUE(g.contains(0, 3));
  EXPECT_FALSE(g.contains(0, 2));
}

TEST(Hypergraph, RejectsMalformedInput) {
  EXPECT_THROW(Hypergraph::build(3, {{0, 1}, {}}), std::invalid_argument);
  EXPECT_THROW(Hypergraph::build(3, {{0, 3}}), std::invalid_argument);
  EXPECT_THROW(Hypergraph::build(3, {{-1}}), std::invalid_argument);
}

TEST(Hypergraph, NeighborsAreUnionOfRows) {
  auto g = Hypergraph::build(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(neighbors(g, 1).neighbors, (std::vector<Index>{0, 2}));
  EXPECT_EQ(neighbors(g, 1).center, 1);
}

TEST(Hypergraph, SingletonHasNoNeighbors) {
  auto g = Hypergraph::build(3, {{0}});
  EXPECT_TRUE(neighbors(g, 0).neighbors.empty());
  EXPECT_TRUE(neighbors(g, 2).neighbors.empty());
  EXPECT_THROW(neighbors(g, 3), std::out_of_range);
}

TEST(Hypergraph, NeighborsMatchBruteForce) {
  auto g = Hypergraph::build(5, {{0, 1, 2}, {2, 3}});
  EXPECT_EQ(neighbors(g, 2).neighbors, (std::vector<Index>{0, 1, 3}));

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 12;
    std::vector<std::vector<Index>> edges;
    std::uniform_int_distribution<Index> node(0, n - 1), size(1, 5);
    for (int e = 0; e < 8; ++e) {
      std::vector<Index> members;
      for (Index k = size(rng); k > 0; --k) members.push_back(node(rng));
      edges.push_back(members);
    }
    auto hg = Hypergraph::build(n, edges);
    auto h = dense(hg);
    for (Index v = 0; v < n; ++v) {
      std::set<Index> expected;
      for (Index e = 0; e < h.rows(); ++e) {
        if (h(e, v) == 0) continue;
        for (Index u = 0; u < n; ++u) {
          if (u != v && h(e, u) != 0) expected.insert(u);
        }
      }
      EXPECT_EQ(neighbors(hg, v).neighbors, std::vector<Index>(expected.begin(), expected.end()));
    }
  }
}

TEST(Hypergraph, AppendNodeAttachesToOneHyperedge) {
  auto g = Hypergraph::build(2, {{0, 1}});
  auto g1 = append_node(g, 0);
  EXPECT_EQ(g1.num_nodes(), 3);
  EXPECT_EQ(g1.node_degree(2), 1);
  EXPECT_TRUE(g1.contains(0, 2));

  auto g2 = append_node(g1, 0);
  EXPECT_EQ(g2.num_nodes(), 4);
  EXPECT_EQ(g2.node_degree(2), 1);
  EXPECT_EQ(g2.node_degree(3), 1);
  EXPECT_THROW(append_node(g, 1), std::out_of_range);
}

TEST(Hypergraph, AppendNodesMatchesRepeatedAppend) {
  auto g = Hypergraph::build(4, {{0, 1}, {1, 2, 3}, {3}});
  std::vector<Index> targets{2, 0, 1, 1};
  Hypergraph folded = g;
  for (Index e : targets) folded = append_node(folded, e);
  EXPECT_EQ(append_nodes(g, targets), folded);

  auto original = dense(g);
  auto grown = dense(folded);
  EXPECT_EQ(grown.leftCols(4), original);
}
