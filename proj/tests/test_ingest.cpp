#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <zlib.h>

#include "hypersmote/ingest.hpp"

using namespace hypersmote;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("hsmote_ingest_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

const char* kContent =
    "p10\t1\t0\t1\tTheory\n"
    "p20\t0\t1\t0\tAI\n"
    "p30\t1\t1\t0\tTheory\n";

}  // namespace

TEST(LoadContent, ParsesToyFile) {
  TempDir dir;
  auto t = load_content(dir.write("toy.content", kContent));
  EXPECT_EQ(t.ids, (std::vector<std::string>{"p10", "p20", "p30"}));
  EXPECT_EQ(t.class_names, (std::vector<std::string>{"AI", "Theory"}));
  EXPECT_EQ(t.labels, (std::vector<Index>{1, 0, 1}));
  EXPECT_EQ(t.features, (Matrix(3, 3) << 1, 0, 1, 0, 1, 0, 1, 1, 0).finished());
}

TEST(LoadContent, ErrorsNameFileAndLine) {
  TempDir dir;
  auto bad = dir.write("bad.content", "a\t1\t0\tX\nb\t1\t2\tY\n");
  try {
    load_content(bad);
    FAIL() << "expected a parse error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("bad.content:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_content(dir.write("ragged.content", "a\t1\t0\tX\nb\t1\tY\n")), std::runtime_error);
  EXPECT_THROW(load_content(dir.write("dup.content", "a\t1\tX\na\t0\tY\n")), std::runtime_error);
  try {
    load_content(dir / "missing.content");
    FAIL() << "expected an open error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("missing.content"), std::string::npos);
  }
}

TEST(Cocitation, BuildsHyperedgesAndSkipsUnknownIds) {
  TempDir dir;
  auto t = load_content(dir.write("toy.content", kContent));
  // p20 and p30 cite p10; p10 cites p99 (unknown).
  auto c = cocitation_hypergraph(t, dir.write("toy.cites", "p10\tp20\np10\tp30\np99\tp10\n"));
  EXPECT_EQ(c.skipped_citations, 1u);
  EXPECT_EQ(c.dropped_hyperedges, 2u);
  ASSERT_EQ(c.graph.num_hyperedges(), 1);
  auto m = c.graph.members(0);
  EXPECT_EQ(std::vector<Index>(m.begin(), m.end()), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(c.graph.num_nodes(), 3);
}

TEST(HyperedgeList, ParsesAndValidates) {
  TempDir dir;
  auto g = load_hyperedge_list(dir.write("h.txt", "0 1\n\n2 1 0\n"), 3);
  EXPECT_EQ(g.num_hyperedges(), 2);
  EXPECT_EQ(g.node_degree(1), 2);
  EXPECT_THROW(load_hyperedge_list(dir.write("oob.txt", "0 3\n"), 3), std::runtime_error);
  EXPECT_THROW(load_hyperedge_list(dir.write("junk.txt", "0 x\n"), 3), std::runtime_error);
}

TEST(Split, ProtocolSizes) {
  auto cora = split_protocol_for("cora");
  EXPECT_EQ(cora.train, 140);
  EXPECT_EQ(cora.val, 500);
  EXPECT_EQ(cora.test, 1000);
  auto citeseer = split_protocol_for("citeseer");
  EXPECT_EQ(citeseer.train, 120);
  EXPECT_EQ(citeseer.test, 1015);
  EXPECT_THROW(split_protocol_for("pubmed-x"), std::invalid_argument);
}

TEST(Split, CoraSizedSplitIsExactAndDisjoint) {
  // Cora class sizes.
  const std::vector<Index> sizes{351, 217, 418, 818, 426, 298, 180};
  std::vector<Index> labels;
  for (Index c = 0; c < 7; ++c) labels.insert(labels.end(), sizes[c], c);
  std::mt19937_64 rng(1);
  std::shuffle(labels.begin(), labels.end(), rng);

  auto s = make_split(labels, 7, split_protocol_for("cora"), 3);
  EXPECT_EQ(s.train.size(), 140u);
  EXPECT_EQ(s.val.size(), 500u);
  EXPECT_EQ(s.test.size(), 1000u);
  std::vector<int> seen(labels.size(), 0);
  for (const auto* part : {&s.train, &s.val, &s.test})
    for (Index v : *part) ++seen[v];
  for (int k : seen) EXPECT_LE(k, 1);

  auto counts = class_counts(labels, s.train, 7);
  for (Index c = 0; c < 7; ++c) {
    EXPECT_NEAR(static_cast<double>(counts[c]), 140.0 * sizes[c] / 2708.0, 1.0);
    EXPECT_GE(counts[c], 1);
  }
  EXPECT_EQ(make_split(labels, 7, split_protocol_for("cora"), 3), s);
  EXPECT_NE(make_split(labels, 7, split_protocol_for("cora"), 4), s);
  EXPECT_THROW(make_split(labels, 7, SplitProtocol{2000, 500, 1000}, 3), std::invalid_argument);
}

TEST(Synth, LayoutMatchesConfig) {
  SynthConfig cfg;
  auto b = synth_imbalanced(cfg);
  b.validate();
  EXPECT_EQ(b.graph.num_nodes(), 40 + 4 + 2 * 40);
  EXPECT_EQ(class_counts(b.labels, b.split.train, 2), (std::vector<Index>{40, 4}));
  EXPECT_EQ(class_counts(b.labels, b.split.val, 2), (std::vector<Index>{20, 20}));
  EXPECT_EQ(b.graph.num_hyperedges(), b.graph.num_nodes());
  for (Index e = 0; e < b.graph.num_hyperedges(); ++e) EXPECT_EQ(b.graph.edge_size(e), 4);
  EXPECT_EQ(b.features.cols(), 16);
}

TEST(Synth, PerClassValidationCounts) {
  SynthConfig cfg;
  cfg.val_counts = {20, 2};
  auto b = synth_imbalanced(cfg);
  EXPECT_EQ(class_counts(b.labels, b.split.val, 2), (std::vector<Index>{20, 2}));
  EXPECT_EQ(class_counts(b.labels, b.split.test, 2), (std::vector<Index>{20, 20}));
  cfg.val_counts = {20};
  EXPECT_THROW(synth_imbalanced(cfg), std::invalid_argument);
}

TEST(Synth, FullHomophilyGivesPureHyperedges) {
  SynthConfig cfg;
  cfg.homophily = 1.0;
  auto b = synth_imbalanced(cfg);
  for (Index e = 0; e < b.graph.num_hyperedges(); ++e) {
    auto m = b.graph.members(e);
    for (Index v : m) EXPECT_EQ(b.labels[v], b.labels[m.front()]);
  }
}

TEST(Synth, ZeroHomophilyMixesUniformly) {
  SynthConfig cfg;
  cfg.homophily = 0.0;
  cfg.nodes_per_hyperedge = 10;
  auto b = synth_imbalanced(cfg);
  const Index n = b.graph.num_nodes();
  const Index minority_total = 44;
  double expected = 0, variance = 0, observed = 0;
  Index draws = 0;
  // Hyperedge e is anchored at node e; the other members are drawn without
  // replacement from the remaining n - 1 nodes.
  for (Index e = 0; e < b.graph.num_hyperedges(); ++e) {
    const double p = (minority_total - (b.labels[e] == 1 ? 1 : 0)) / static_cast<double>(n - 1);
    for (Index v : b.graph.members(e)) {
      if (v == e) continue;
      observed += b.labels[v] == 1;
      expected += p;
      variance += p * (1 - p);
      ++draws;
    }
  }
  ASSERT_GE(draws, 1000);
  EXPECT_LT(std::abs(observed - expected), 4 * std::sqrt(variance));
}

TEST(Synth, RejectsBadConfigs) {
  SynthConfig cfg;
  cfg.train_counts = {40};
  EXPECT_THROW(synth_imbalanced(cfg), std::invalid_argument);
  cfg = SynthConfig{};
  cfg.homophily = 1.5;
  EXPECT_THROW(synth_imbalanced(cfg), std::invalid_argument);
}

TEST(Artifacts, BundleRoundTripIsBitExact) {
  TempDir dir;
  auto b = synth_imbalanced(SynthConfig{});
  save_bundle(dir / "b.hsmk", b);
  auto back = load_bundle(dir / "b.hsmk");
  EXPECT_TRUE(back == b);
  EXPECT_EQ(back.meta, b.meta);
  EXPECT_EQ(read_artifact(dir / "b.hsmk").kind, "bundle");

  b.meta["augmentation"] = {{"variant", "decoder"}, {"seed", 3}};
  save_bundle(dir / "x.hsmk", b);
  EXPECT_EQ(read_artifact(dir / "x.hsmk").kind, "expanded-bundle");
  EXPECT_TRUE(load_bundle(dir / "x.hsmk") == b);
}

TEST(Artifacts, DetectsCorruptionAndVersion) {
  auto bytes = encode_artifact(to_artifact(synth_imbalanced(SynthConfig{})));
  auto flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x01;
  EXPECT_THROW(decode_artifact(flipped), std::runtime_error);

  auto truncated = bytes;
  truncated.resize(8);
  EXPECT_THROW(decode_artifact(truncated), std::runtime_error);

  auto forged = [](int version) {
    const std::string header = R"({"blocks":{},"format":"HSMK","kind":"plan","meta":{},"version":)" +
                               std::to_string(version) + "}";
    std::vector<std::uint8_t> out{'H', 'S', 'M', 'K', '1'};
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(header.size() >> (8 * i)));
    out.insert(out.end(), header.begin(), header.end());
    const auto crc = static_cast<std::uint32_t>(crc32(0L, out.data(), static_cast<uInt>(out.size())));
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
    return out;
  };
  EXPECT_EQ(decode_artifact(forged(kArtifactVersion)).kind, "plan");
  try {
    decode_artifact(forged(kArtifactVersion + 1));
    FAIL() << "expected a version error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(Artifacts, PlanRoundTripAndValidation) {
  TempDir dir;
  auto b = synth_imbalanced(SynthConfig{});
  PlanConfig cfg;
  cfg.minority.num_minority_classes = 1;
  cfg.count = FixedCount{2};
  auto plan = build_plan(b.graph, b.features, b.features, b.labels, 2, b.split, cfg);
  plan.entries[0].hyperedge = 5;
  save_plan(dir / "p.hsmk", plan, PlanMeta{7, "decoder", "2", "synthetic"});
  PlanMeta meta;
  auto back = load_plan(dir / "p.hsmk", &meta);
  EXPECT_EQ(back, plan);
  EXPECT_EQ(meta.seed, 7u);
  EXPECT_EQ(meta.variant, "decoder");
  EXPECT_NO_THROW(validate_plan(back, b));

  SynthConfig wide;
  wide.dim = 20;
  EXPECT_THROW(validate_plan(back, synth_imbalanced(wide)), std::invalid_argument);
  EXPECT_THROW(load_bundle(dir / "p.hsmk"), std::runtime_error);
}

TEST(Artifacts, CheckpointRoundTrip) {
  TempDir dir;
  Rng rng(1);
  Checkpoint c;
  c.model = ClassifierModel::init(5, 3, ClassifierConfig{}, rng);
  c.config.seed = 4;
  c.config.epochs = 17;
  c.dataset = "synthetic";
  c.best_epoch = 9;
  save_checkpoint(dir / "c.hsmk", c);
  auto back = load_checkpoint(dir / "c.hsmk");
  auto a = c.model.parameters();
  auto b = back.model.parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(*a[i], *b[i]);
  EXPECT_EQ(back.config.epochs, 17);
  EXPECT_EQ(back.config.seed, 4u);
  EXPECT_EQ(back.best_epoch, 9);
  EXPECT_EQ(back.config.model.hidden_dim, 64);
}
