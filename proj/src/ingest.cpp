#include "hypersmote/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace hypersmote {

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return in;
}

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 || std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
}

}  // namespace

void DatasetBundle::validate() const {
  const Index n = graph.num_nodes();
  if (features.rows() != n) throw std::invalid_argument("bundle: feature rows != node count");
  if (static_cast<Index>(labels.size()) != n) throw std::invalid_argument("bundle: label count != node count");
  require_finite(features, "bundle features");
  for (Index l : labels) {
    if (l < 0 || l >= num_classes()) throw std::invalid_argument("bundle: label out of range");
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto* part : {&split.train, &split.val, &split.test}) {
    for (Index i : *part) {
      if (i < 0 || i >= n) throw std::invalid_argument("bundle: split index out of range");
      if (seen[i]++) throw std::invalid_argument("bundle: split parts overlap");
    }
  }
}

bool operator==(const DatasetBundle& a, const DatasetBundle& b) {
  return a.name == b.name && a.rule == b.rule && a.seed == b.seed && a.graph == b.graph &&
         same_matrix(a.features, b.features) && a.labels == b.labels && a.class_names == b.class_names &&
         a.split == b.split && a.meta == b.meta;
}

ContentTable load_content(const std::filesystem::path& path) {
  auto in = open_input(path);
  ContentTable table;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> label_names;
  std::unordered_map<std::string, std::size_t> seen_ids;
  std::size_t width = 0;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line, '\t');
    if (fields.size() < 3) parse_error(path, lineno, "expected <id>\\t<features...>\\t<label>");
    const std::size_t d = fields.size() - 2;
    if (rows.empty()) {
      width = d;
    } else if (d != width) {
      parse_error(path, lineno,
                  "inconsistent feature width " + std::to_string(d) + " (expected " + std::to_string(width) + ")");
    }
    if (!seen_ids.emplace(fields.front(), lineno).second) parse_error(path, lineno, "duplicate id " + fields.front());
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j) {
      const auto& f = fields[j + 1];
      if (f == "0") row[j] = 0.0;
      else if (f == "1") row[j] = 1.0;
      else parse_error(path, lineno, "feature column " + std::to_string(j + 1) + " is not 0/1: '" + f + "'");
    }
    table.ids.push_back(fields.front());
    rows.push_back(std::move(row));
    label_names.push_back(fields.back());
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": no records");

  std::set<std::string> names(label_names.begin(), label_names.end());
  table.class_names.assign(names.begin(), names.end());
  std::map<std::string, Index> class_id;
  for (std::size_t c = 0; c < table.class_names.size(); ++c) class_id[table.class_names[c]] = static_cast<Index>(c);

  table.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) table.features(i, j) = rows[i][j];
    table.labels.push_back(class_id[label_names[i]]);
  }
  return table;
}

CitationGraph cocitation_hypergraph(const ContentTable& content, const std::filesystem::path& cites_path) {
  auto in = open_input(cites_path);
  std::unordered_map<std::string, Index> index;
  for (std::size_t i = 0; i < content.ids.size(); ++i) index.emplace(content.ids[i], static_cast<Index>(i));

  const auto n = static_cast<Index>(content.ids.size());
  std::vector<std::set<Index>> citers(static_cast<std::size_t>(n));
  CitationGraph out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_fields(line, '\t');
    if (fields.size() != 2) parse_error(cites_path, lineno, "expected <cited_id>\\t<citing_id>");
    auto cited = index.find(fields[0]);
    auto citing = index.find(fields[1]);
    if (cited == index.end() || citing == index.end()) {
      ++out.skipped_citations;
      continue;
    }
    citers[cited->second].insert(citing->second);
  }

  std::vector<std::vector<Index>> edges;
  for (Index p = 0; p < n; ++p) {
    std::set<Index> members = citers[p];
    members.insert(p);
    if (members.size() < 2) {
      ++out.dropped_hyperedges;
      continue;
    }
    edges.emplace_back(members.begin(), members.end());
  }
  if (edges.empty()) throw std::runtime_error(cites_path.string() + ": no co-citation hyperedge has two members");
  out.graph = Hypergraph::build(n, edges);
  return out;
}

Hypergraph load_hyperedge_list(const std::filesystem::path& path, Index num_nodes) {
  auto in = open_input(path);
  std::vector<std::vector<Index>> edges;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    line = strip_cr(line);
    std::istringstream fields(line);
    std::vector<Index> edge;
    std::string tok;
    while (fields >> tok) {
      std::size_t used = 0;
      long long v = -1;
      try {
        v = std::stoll(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) parse_error(path, lineno, "not a node index: '" + tok + "'");
      if (v < 0 || v >= num_nodes) parse_error(path, lineno, "node index " + tok + " out of range");
      edge.push_back(static_cast<Index>(v));
    }
    if (!edge.empty()) edges.push_back(std::move(edge));
  }
  if (edges.empty()) throw std::runtime_error(path.string() + ": no hyperedges");
  return Hypergraph::build(num_nodes, edges);
}

SplitProtocol split_protocol_for(const std::string& dataset) {
  if (dataset == "cora" || dataset == "cora-ca") return {140, 500, 1000};
  if (dataset == "citeseer") return {120, 500, 1015};
  throw std::invalid_argument("no split protocol known for dataset '" + dataset + "'");
}

Split make_split(std::span<const Index> labels, Index num_classes, const SplitProtocol& protocol,
                 std::uint64_t seed) {
  const auto n = static_cast<Index>(labels.size());
  if (protocol.train < 1 || protocol.val < 0 || protocol.test < 0) throw std::invalid_argument("invalid split sizes");
  if (protocol.train + protocol.val + protocol.test > n) {
    throw std::invalid_argument("make_split: protocol needs " +
                                std::to_string(protocol.train + protocol.val + protocol.test) + " nodes, have " +
                                std::to_string(n));
  }
  Rng rng(seed);
  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(num_classes));
  for (Index i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw std::out_of_range("make_split: label out of range");
    by_class[labels[i]].push_back(i);
  }

  // Largest-remainder proportional quotas.
  std::vector<Index> quota(static_cast<std::size_t>(num_classes), 0);
  std::vector<std::pair<double, Index>> remainders;
  Index assigned = 0;
  for (Index c = 0; c < num_classes; ++c) {
    const double exact = static_cast<double>(protocol.train) * by_class[c].size() / static_cast<double>(n);
    quota[c] = static_cast<Index>(std::floor(exact));
    assigned += quota[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](auto a, auto b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < protocol.train && k < remainders.size(); ++k, ++assigned) {
    ++quota[remainders[k].second];
  }
  // Every non-empty class gets at least one training node, taken from the
  // largest quota.
  if (protocol.train >= num_classes) {
    for (Index c = 0; c < num_classes; ++c) {
      if (quota[c] == 0 && !by_class[c].empty()) {
        auto donor = std::max_element(quota.begin(), quota.end()) - quota.begin();
        --quota[donor];
        ++quota[c];
      }
    }
  }

  Split split;
  std::vector<Index> rest;
  for (Index c = 0; c < num_classes; ++c) {
    auto nodes = by_class[c];
    std::shuffle(nodes.begin(), nodes.end(), rng);
    const auto take = static_cast<std::size_t>(std::min<Index>(quota[c], static_cast<Index>(nodes.size())));
    split.train.insert(split.train.end(), nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(take));
    rest.insert(rest.end(), nodes.begin() + static_cast<std::ptrdiff_t>(take), nodes.end());
  }
  if (static_cast<Index>(split.train.size()) != protocol.train) {
    throw std::invalid_argument("make_split: not enough labelled nodes per class for the training quota");
  }
  std::sort(rest.begin(), rest.end());
  std::shuffle(rest.begin(), rest.end(), rng);
  split.val.assign(rest.begin(), rest.begin() + protocol.val);
  split.test.assign(rest.begin() + protocol.val, rest.begin() + protocol.val + protocol.test);
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

DatasetBundle synth_imbalanced(const SynthConfig& config) {
  const auto classes = static_cast<Index>(config.train_counts.size());
  if (classes < 2) throw std::invalid_argument("synth: need at least two classes");
  if (config.homophily < 0.0 || config.homophily > 1.0) throw std::invalid_argument("synth: homophily outside [0,1]");
  if (config.nodes_per_hyperedge < 2) throw std::invalid_argument("synth: hyperedges need at least two nodes");
  if (config.dim < classes) throw std::invalid_argument("synth: dim must be >= number of classes");
  if (config.val_per_class < 0 || config.test_per_class < 0) throw std::invalid_argument("synth: negative pool size");
  for (Index c : config.train_counts) {
    if (c < 1) throw std::invalid_argument("synth: every class needs at least one training node");
  }
  if (!config.val_counts.empty() && static_cast<Index>(config.val_counts.size()) != classes) {
    throw std::invalid_argument("synth: val_counts needs one entry per class");
  }
  for (Index c : config.val_counts) {
    if (c < 0) throw std::invalid_argument("synth: negative pool size");
  }
  auto val_count = [&](Index c) { return config.val_counts.empty() ? config.val_per_class : config.val_counts[c]; };

  Rng rng(config.seed);
  std::normal_distribution<double> normal(0.0, config.noise);
  DatasetBundle b;
  b.name = "synthetic";
  b.rule = "synthetic";
  b.seed = config.seed;
  for (Index c = 0; c < classes; ++c) b.class_names.push_back("c" + std::to_string(c));

  std::vector<std::vector<Index>> members(static_cast<std::size_t>(classes));
  for (Index c = 0; c < classes; ++c) {
    const Index total = config.train_counts[c] + val_count(c) + config.test_per_class;
    for (Index k = 0; k < total; ++k) {
      const auto id = static_cast<Index>(b.labels.size());
      b.labels.push_back(c);
      members[c].push_back(id);
      if (k < config.train_counts[c]) b.split.train.push_back(id);
      else if (k < config.train_counts[c] + val_count(c)) b.split.val.push_back(id);
      else b.split.test.push_back(id);
    }
  }
  const auto n = static_cast<Index>(b.labels.size());
  b.features.resize(n, config.dim);
  const double mean_scale = 1.0 / std::sqrt(2.0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < config.dim; ++j) {
      b.features(i, j) = normal(rng) + (j == b.labels[i] ? mean_scale : 0.0);
    }
  }

  std::bernoulli_distribution homophilous(config.homophily);
  std::vector<std::vector<Index>> edges;
  std::vector<Index> everyone(static_cast<std::size_t>(n));
  std::iota(everyone.begin(), everyone.end(), Index{0});
  for (Index v = 0; v < n; ++v) {
    const auto& pool_src = homophilous(rng) ? members[b.labels[v]] : everyone;
    std::vector<Index> pool;
    for (Index u : pool_src) {
      if (u != v) pool.push_back(u);
    }
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(config.nodes_per_hyperedge - 1), pool.size());
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    std::vector<Index> edge{v};
    edge.insert(edge.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    edges.push_back(std::move(edge));
  }
  b.graph = Hypergraph::build(n, edges);
  b.meta["synth"] = {{"train_counts", config.train_counts},
                     {"val_per_class", config.val_per_class},
                     {"val_counts", config.val_counts},
                     {"test_per_class", config.test_per_class},
                     {"nodes_per_hyperedge", config.nodes_per_hyperedge},
                     {"homophily", config.homophily},
                     {"dim", config.dim},
                     {"noise", config.noise}};
  return b;
}

Artifact to_artifact(const DatasetBundle& bundle, const std::string& kind) {
  bundle.validate();
  Artifact a;
  a.kind = kind;
  a.meta = {{"name", bundle.name},
            {"rule", bundle.rule},
            {"seed", bundle.seed},
            {"class_names", bundle.class_names},
            {"num_nodes", bundle.graph.num_nodes()},
            {"num_hyperedges", bundle.graph.num_hyperedges()},
            {"extra", bundle.meta}};
  a.put("features", bundle.features);
  a.put("labels", bundle.labels);
  a.put("edge_offsets", bundle.graph.members().offsets);
  a.put("edge_members", bundle.graph.members().indices);
  a.put("train", bundle.split.train);
  a.put("val", bundle.split.val);
  a.put("test", bundle.split.test);
  return a;
}

DatasetBundle bundle_from_artifact(const Artifact& a) {
  if (a.kind != "bundle" && a.kind != "expanded-bundle") {
    throw std::runtime_error("artifact kind '" + a.kind + "' is not a dataset bundle");
  }
  DatasetBundle b;
  b.name = a.meta.at("name").get<std::string>();
  b.rule = a.meta.at("rule").get<std::string>();
  b.seed = a.meta.at("seed").get<std::uint64_t>();
  b.class_names = a.meta.at("class_names").get<std::vector<std::string>>();
  b.meta = a.meta.at("extra");
  b.features = a.get_matrix("features");
  b.labels = a.get_indices("labels");

  IndexGroups groups;
  groups.offsets = a.get_indices("edge_offsets");
  groups.indices = a.get_indices("edge_members");
  std::vector<std::vector<Index>> edges;
  for (Index e = 0; e < groups.size(); ++e) edges.emplace_back(groups[e].begin(), groups[e].end());
  b.graph = Hypergraph::build(a.meta.at("num_nodes").get<Index>(), edges);
  if (b.graph.members() != groups) throw std::runtime_error("artifact: hyperedge members are not canonical");

  b.split.train = a.get_indices("train");
  b.split.val = a.get_indices("val");
  b.split.test = a.get_indices("test");
  b.validate();
  return b;
}

void save_bundle(const std::filesystem::path& path, const DatasetBundle& bundle) {
  write_artifact(path, to_artifact(bundle, bundle.meta.contains("augmentation") ? "expanded-bundle" : "bundle"));
}

DatasetBundle load_bundle(const std::filesystem::path& path) { return bundle_from_artifact(read_artifact(path)); }

void save_plan(const std::filesystem::path& path, const AugmentationPlan& plan, const PlanMeta& meta) {
  Artifact a;
  a.kind = "plan";
  const auto n = static_cast<Index>(plan.entries.size());
  const Index emb_dim = n ? plan.entries.front().embedding.size() : 0;
  const Index feat_dim = n ? plan.entries.front().features.size() : 0;
  Matrix emb(n, emb_dim), feat(n, feat_dim), tau(n, 1);
  std::vector<Index> targets, labels, edges;
  for (Index k = 0; k < n; ++k) {
    const auto& e = plan.entries[k];
    if (e.embedding.size() != emb_dim || e.features.size() != feat_dim) {
      throw std::invalid_argument("save_plan: ragged plan entries");
    }
    emb.row(k) = e.embedding;
    feat.row(k) = e.features;
    tau(k, 0) = e.tau;
    targets.push_back(e.target);
    labels.push_back(e.label);
    edges.push_back(e.hyperedge);
  }
  a.put("embeddings", emb);
  a.put("features", feat);
  a.put("tau", tau);
  a.put("targets", targets);
  a.put("labels", labels);
  a.put("hyperedges", edges);
  a.put("minority_classes", plan.minority_classes);
  a.put("per_class_added", plan.per_class_added);
  a.meta = {{"seed", meta.seed},
            {"variant", meta.variant},
            {"count_policy", meta.count_policy},
            {"dataset", meta.dataset},
            {"entries", n},
            {"embedding_dim", emb_dim},
            {"feature_dim", feat_dim}};
  write_artifact(path, a);
}

AugmentationPlan load_plan(const std::filesystem::path& path, PlanMeta* meta) {
  const auto a = read_artifact(path);
  expect_kind(a, "plan");
  const Matrix emb = a.get_matrix("embeddings");
  const Matrix feat = a.get_matrix("features");
  const Matrix tau = a.get_matrix("tau");
  const auto targets = a.get_indices("targets");
  const auto labels = a.get_indices("labels");
  const auto edges = a.get_indices("hyperedges");
  AugmentationPlan plan;
  plan.minority_classes = a.get_indices("minority_classes");
  plan.per_class_added = a.get_indices("per_class_added");
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const auto r = static_cast<Index>(k);
    plan.entries.push_back({targets[k], labels[k], tau(r, 0), emb.row(r), feat.row(r), edges[k]});
  }
  if (meta) {
    meta->seed = a.meta.at("seed").get<std::uint64_t>();
    meta->variant = a.meta.at("variant").get<std::string>();
    meta->count_policy = a.meta.at("count_policy").get<std::string>();
    meta->dataset = a.meta.at("dataset").get<std::string>();
  }
  return plan;
}

void validate_plan(const AugmentationPlan& plan, const DatasetBundle& bundle) {
  for (const auto& e : plan.entries) {
    if (e.features.size() != bundle.features.cols()) {
      throw std::invalid_argument("plan feature dim " + std::to_string(e.features.size()) +
                                  " does not match bundle feature dim " + std::to_string(bundle.features.cols()));
    }
    if (e.target < 0 || e.target >= bundle.graph.num_nodes()) throw std::invalid_argument("plan target out of range");
    if (e.label != bundle.labels[e.target]) throw std::invalid_argument("plan label differs from its target's label");
    if (e.hyperedge >= bundle.graph.num_hyperedges()) throw std::invalid_argument("plan hyperedge out of range");
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  Artifact a;
  a.kind = "checkpoint";
  const auto& m = ckpt.model;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    a.put("layer" + std::to_string(l) + ".w1", m.layers[l].w1.weight);
    a.put("layer" + std::to_string(l) + ".w2", m.layers[l].w2.weight);
  }
  a.put("head.weight", m.head.weight);
  a.put("head.bias", m.head.bias);
  const auto& c = ckpt.config;
  a.meta = {{"dataset", ckpt.dataset},
            {"best_epoch", ckpt.best_epoch},
            {"num_layers", m.layers.size()},
            {"hidden_dim", c.model.hidden_dim},
            {"dropout", c.model.dropout},
            {"epochs", c.epochs},
            {"lr", c.lr},
            {"weight_decay", c.weight_decay},
            {"seed", c.seed}};
  write_artifact(path, a);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto a = read_artifact(path);
  expect_kind(a, "checkpoint");
  Checkpoint ckpt;
  ckpt.dataset = a.meta.at("dataset").get<std::string>();
  ckpt.best_epoch = a.meta.at("best_epoch").get<int>();
  ckpt.config.model.num_layers = a.meta.at("num_layers").get<int>();
  ckpt.config.model.hidden_dim = a.meta.at("hidden_dim").get<Index>();
  ckpt.config.model.dropout = a.meta.at("dropout").get<double>();
  ckpt.config.epochs = a.meta.at("epochs").get<int>();
  ckpt.config.lr = a.meta.at("lr").get<double>();
  ckpt.config.weight_decay = a.meta.at("weight_decay").get<double>();
  ckpt.config.seed = a.meta.at("seed").get<std::uint64_t>();
  for (int l = 0; l < ckpt.config.model.num_layers; ++l) {
    HGConvLayer layer;
    layer.w1.weight = a.get_matrix("layer" + std::to_string(l) + ".w1");
    layer.w2.weight = a.get_matrix("layer" + std::to_string(l) + ".w2");
    ckpt.model.layers.push_back(std::move(layer));
  }
  ckpt.model.head.weight = a.get_matrix("head.weight");
  ckpt.model.head.bias = a.get_matrix("head.bias");
  return ckpt;
}

}  // namespace hypersmote
