#include <gtest/gtest.h>

#include <map>

#include "helpers.hpp"
#include "hypersmote/oversample.hpp"

using namespace hypersmote;
using hypersmote::testing::random_hypergraph;
using hypersmote::testing::random_matrix;

namespace {

struct Labelled {
  std::vector<Index> labels;
  Split split;
};

/// Training nodes with the given per-class counts, class-major order.
Labelled with_counts(const std::vector<Index>& counts) {
  Labelled out;
  for (Index c = 0; c < static_cast<Index>(counts.size()); ++c) {
    for (Index k = 0; k < counts[c]; ++k) {
      out.split.train.push_back(static_cast<Index>(out.labels.size()));
      out.labels.push_back(c);
    }
  }
  return out;
}

}  // namespace

TEST(SelectMinority, SmallestCountsInCountOrder) {
  auto d = with_counts({50, 10, 5, 40});
  EXPECT_EQ(select_minority(d.labels, d.split, 4, MinorityPolicy{2}), (std::vector<Index>{2, 1}));
  EXPECT_EQ(select_minority(d.labels, d.split, 4, MinorityPolicy{4}).size(), 4u);
}

TEST(SelectMinority, TiesGoToSmallerId) {
  auto d = with_counts({5, 5, 9});
  EXPECT_EQ(select_minority(d.labels, d.split, 3, MinorityPolicy{1}), std::vector<Index>{0});
}

TEST(SelectMinority, IgnoresNonTrainingNodes) {
  auto d = with_counts({3, 6});
  for (int k = 0; k < 10; ++k) {
    d.split.test.push_back(static_cast<Index>(d.labels.size()));
    d.labels.push_back(1);
  }
  EXPECT_EQ(class_counts(d.labels, d.split.train, 2), (std::vector<Index>{3, 6}));
  EXPECT_EQ(select_minority(d.labels, d.split, 2, MinorityPolicy{1}), std::vector<Index>{0});
}

TEST(AugmentationCount, FixedAndAdaptive) {
  const std::vector<Index> counts{20, 5, 20, 3};
  const std::vector<Index> minority{1, 2, 3};
  EXPECT_EQ(augmentation_count(FixedCount{3}, counts, minority), (std::vector<Index>{3, 3, 3}));
  // round(20/5)-1 = 3, max(1, round(20/20)-1) = 1, round(20/3)-1 = 6
  EXPECT_EQ(augmentation_count(AdaptiveCount{}, counts, minority), (std::vector<Index>{3, 1, 6}));
}

TEST(CountPolicy, ParsesAndPrints) {
  EXPECT_TRUE(std::holds_alternative<AdaptiveCount>(parse_count_policy("adaptive")));
  EXPECT_EQ(std::get<FixedCount>(parse_count_policy("3")).n, 3);
  EXPECT_EQ(to_string(parse_count_policy("1")), "1");
  EXPECT_EQ(to_string(CountPolicy{AdaptiveCount{}}), "adaptive");
  EXPECT_THROW(parse_count_policy("0"), std::invalid_argument);
  EXPECT_THROW(parse_count_policy("lots"), std::invalid_argument);
}

TEST(GenerateEmbedding, Limits) {
  auto g = Hypergraph::build(3, {{0, 1, 2}});
  Matrix emb(3, 2);
  emb << 7, -2, 1, 0, 0, 1;
  EXPECT_EQ(generate_embedding(g, emb, 0, 1.0), emb.row(0));
  EXPECT_EQ(generate_embedding(g, emb, 0, 0.0), (RowVector(2) << 0.5, 0.5).finished());
}

TEST(GenerateEmbedding, InterpolatesTowardNeighborMean) {
  auto g = Hypergraph::build(3, {{0, 1}, {0, 2}});
  Matrix emb(3, 2);
  emb << 1, 1, 0, 0, 0, 0;
  RowVector out = generate_embedding(g, emb, 0, 0.3);
  EXPECT_NEAR(out(0), 0.3, 1e-15);
  EXPECT_NEAR(out(1), 0.3, 1e-15);
}

TEST(GenerateEmbedding, IsolatedTargetReturnsItself) {
  auto g = Hypergraph::build(3, {{0}, {1, 2}});
  Matrix emb = Matrix::Identity(3, 3);
  EXPECT_EQ(generate_embedding(g, emb, 0, 0.3), emb.row(0));
  EXPECT_THROW(generate_embedding(g, emb, 0, 1.5), std::invalid_argument);
}

TEST(GenerateEmbedding, StaysInsideNeighborhoodEnvelope) {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = random_hypergraph(15, 6, 5, rng);
    Matrix emb = random_matrix(15, 4, rng, -3, 3);
    for (double tau : {0.0, 0.3, 0.5, 1.0}) {
      for (Index v = 0; v < 15; ++v) {
        RowVector out = generate_embedding(g, emb, v, tau);
        auto nb = neighbors(g, v).neighbors;
        nb.push_back(v);
        for (Index d = 0; d < 4; ++d) {
          double lo = emb(v, d), hi = emb(v, d);
          for (Index u : nb) {
            lo = std::min(lo, emb(u, d));
            hi = std::max(hi, emb(u, d));
          }
          EXPECT_GE(out(d), lo - 1e-12);
          EXPECT_LE(out(d), hi + 1e-12);
        }
      }
    }
  }
}

namespace {

AugmentationPlan plan_for(const std::vector<Index>& counts, const PlanConfig& cfg, Index minority = 1) {
  Rng rng(2);
  auto d = with_counts(counts);
  const Index n = static_cast<Index>(d.labels.size());
  auto g = random_hypergraph(n, n / 2 + 1, 4, rng);
  Matrix emb = random_matrix(n, 3, rng), feats = random_matrix(n, 5, rng);
  PlanConfig c = cfg;
  c.minority.num_minority_classes = minority;
  return build_plan(g, emb, feats, d.labels, static_cast<Index>(counts.size()), d.split, c);
}

}  // namespace

TEST(BuildPlan, FixedCountMultiplies) {
  PlanConfig cfg;
  cfg.count = FixedCount{3};
  auto plan = plan_for({10, 2}, cfg);
  EXPECT_EQ(plan.entries.size(), 6u);
  EXPECT_EQ(plan.minority_classes, std::vector<Index>{1});
  EXPECT_EQ(plan.per_class_added, (std::vector<Index>{0, 6}));
  for (const auto& e : plan.entries) {
    EXPECT_EQ(e.label, 1);
    EXPECT_EQ(e.hyperedge, -1);
    EXPECT_EQ(e.embedding.size(), 3);
    EXPECT_EQ(e.features.size(), 5);
  }
}

TEST(BuildPlan, AdaptiveReachesMajority) {
  auto plan = plan_for({12, 4}, PlanConfig{});
  std::map<Index, int> per_target;
  for (const auto& e : plan.entries) ++per_target[e.target];
  EXPECT_EQ(per_target.size(), 4u);
  for (auto [target, n] : per_target) EXPECT_EQ(n, 2);
  EXPECT_EQ(4 + plan.per_class_added[1], 12);
}

TEST(BuildPlan, AdaptiveFillsGapForUnevenRatios) {
  auto plan = plan_for({40, 7, 3}, PlanConfig{}, 2);
  EXPECT_NEAR(7 + plan.per_class_added[1], 40, 1);
  EXPECT_NEAR(3 + plan.per_class_added[2], 40, 1);
}

TEST(BuildPlan, LabelsFollowTargetsInOrder) {
  PlanConfig cfg;
  cfg.count = FixedCount{2};
  auto plan = plan_for({9, 3, 4}, cfg, 2);
  auto d = with_counts({9, 3, 4});
  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    EXPECT_EQ(plan.entries[i].label, d.labels[plan.entries[i].target]);
    if (i > 0) EXPECT_LE(plan.entries[i - 1].target, plan.entries[i].target);
  }
}

TEST(BuildPlan, FirstRepetitionIsExactSynthesis) {
  Rng rng(3);
  auto d = with_counts({6, 2});
  auto g = random_hypergraph(8, 4, 4, rng);
  Matrix emb = random_matrix(8, 3, rng), feats = random_matrix(8, 4, rng);
  PlanConfig cfg;
  cfg.count = FixedCount{3};
  cfg.minority.num_minority_classes = 1;
  auto plan = build_plan(g, emb, feats, d.labels, 2, d.split, cfg);
  ASSERT_EQ(plan.entries.size(), 6u);
  for (std::size_t i = 0; i < plan.entries.size(); i += 3) {
    const auto& e = plan.entries[i];
    EXPECT_EQ(e.embedding, generate_embedding(g, emb, e.target, 0.3));
    EXPECT_EQ(e.features, generate_embedding(g, feats, e.target, 0.3));
    EXPECT_NE(plan.entries[i + 1].features, e.features);
  }

  cfg.jitter = false;
  auto plain = build_plan(g, emb, feats, d.labels, 2, d.split, cfg);
  EXPECT_EQ(plain.entries[0].features, plain.entries[1].features);
}

TEST(BuildPlan, SeedDeterminesJitter) {
  PlanConfig cfg;
  cfg.count = FixedCount{3};
  cfg.seed = 5;
  EXPECT_EQ(plan_for({10, 2}, cfg), plan_for({10, 2}, cfg));
  auto other = cfg;
  other.seed = 6;
  EXPECT_FALSE(plan_for({10, 2}, cfg) == plan_for({10, 2}, other));
}
