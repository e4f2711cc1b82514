// hypersmote: staged command-line driver.
//
//   ingest   raw citation files or synthetic options -> bundle artifact
//   augment  bundle -> expanded bundle + plan (decoder pretraining, synthesis, attachment)
//   train    bundle -> checkpoints + test reports over a seed list (optionally sweeping augmentation settings)
//   eval     bundle + checkpoint -> report
//   repro    preset grids shaped like the citation-benchmark tables

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hypersmote/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hypersmote;

namespace {

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split_list(text, ',')) seeds.push_back(std::stoull(s));
  if (seeds.empty()) throw std::invalid_argument("seed list is empty");
  return seeds;
}

SplitProtocol parse_protocol(const std::string& text) {
  const auto parts = split_list(text, ',');
  if (parts.size() != 3) throw std::invalid_argument("split protocol must be train,val,test");
  return {std::stoll(parts[0]), std::stoll(parts[1]), std::stoll(parts[2])};
}

// "classes=2,counts=40:4,homophily=0.9,k=4,dim=16,noise=1,val=20,test=20"
// val also accepts per-class counts, e.g. val=20:2.
SynthConfig parse_synth(const std::string& text, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  Index classes = -1;
  for (const auto& kv : split_list(text, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("synth option '" + kv + "' is not key=value");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "classes") classes = std::stoll(value);
    else if (key == "counts") {
      cfg.train_counts.clear();
      for (const auto& c : split_list(value, ':')) cfg.train_counts.push_back(std::stoll(c));
    } else if (key == "homophily") cfg.homophily = std::stod(value);
    else if (key == "k") cfg.nodes_per_hyperedge = std::stoll(value);
    else if (key == "dim") cfg.dim = std::stoll(value);
    else if (key == "noise") cfg.noise = std::stod(value);
    else if (key == "val" && value.find(':') != std::string::npos) {
      for (const auto& c : split_list(value, ':')) cfg.val_counts.push_back(std::stoll(c));
    } else if (key == "val") cfg.val_per_class = std::stoll(value);
    else if (key == "test") cfg.test_per_class = std::stoll(value);
    else throw std::invalid_argument("unknown synth option '" + key + "'");
  }
  if (classes >= 0 && classes != static_cast<Index>(cfg.train_counts.size())) {
    throw std::invalid_argument("synth: classes does not match the number of counts");
  }
  return cfg;
}

struct AugmentArgs {
  double tau = 0.3;
  std::string count = "adaptive";
  std::string variant = "decoder";
  std::string space = "raw";
  Index minority = 3;
  Index hidden = 64;
  int decoder_epochs = 200;
  double decoder_lr = 0.01;
  double negative_ratio = 0.0;
  bool no_jitter = false;

  void add_to(CLI::App* app) {
    app->add_option("--tau", tau, "interpolation weight of the target embedding")->capture_default_str();
    app->add_option("--count", count, "augmentations per minority node: adaptive or a positive integer")
        ->capture_default_str();
    app->add_option("--variant", variant, "decoder | random | closest-node | closest-hyperedge")->capture_default_str();
    app->add_option("--feature-space", space, "raw | embedding features for the expanded bundle")
        ->capture_default_str();
    app->add_option("--minority", minority, "number of minority classes")->capture_default_str();
    app->add_option("--decoder-hidden", hidden, "encoder/decoder embedding width")->capture_default_str();
    app->add_option("--decoder-epochs", decoder_epochs)->capture_default_str();
    app->add_option("--decoder-lr", decoder_lr)->capture_default_str();
    app->add_option("--negative-ratio", negative_ratio, "0 = exact full reconstruction loss")->capture_default_str();
    app->add_flag("--no-jitter", no_jitter, "keep repeated syntheses identical");
  }

  AugmentConfig config() const {
    AugmentConfig c;
    c.plan.tau = tau;
    c.plan.count = parse_count_policy(count);
    c.plan.minority.num_minority_classes = minority;
    c.plan.jitter = !no_jitter;
    c.decoder.hidden_dim = hidden;
    c.decoder.epochs = decoder_epochs;
    c.decoder.lr = decoder_lr;
    c.decoder.negative_ratio = negative_ratio;
    c.variant = parse_variant(variant);
    c.space = parse_feature_space(space);
    c.validate();
    return c;
  }
};

struct TrainArgs {
  std::string seeds = "0,1,2,3,4";
  int epochs = 200;
  Index hidden = 64;
  int layers = 2;
  double lr = 0.01;
  double weight_decay = 5e-4;
  double dropout = 0.5;
  bool resplit = false;

  void add_to(CLI::App* app) {
    app->add_option("--seeds", seeds, "comma-separated seed list")->capture_default_str();
    app->add_option("--epochs", epochs)->capture_default_str();
    app->add_option("--hidden", hidden)->capture_default_str();
    app->add_option("--layers", layers)->capture_default_str();
    app->add_option("--lr", lr)->capture_default_str();
    app->add_option("--weight-decay", weight_decay)->capture_default_str();
    app->add_option("--dropout", dropout)->capture_default_str();
    app->add_flag("--resplit", resplit, "redraw the split per seed from the dataset's protocol");
  }

  TrainConfig config() const {
    if (epochs < 1 || hidden < 1 || layers < 1) throw std::invalid_argument("epochs, hidden and layers must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must lie in [0, 1)");
    TrainConfig c;
    c.epochs = epochs;
    c.model.hidden_dim = hidden;
    c.model.num_layers = layers;
    c.model.dropout = dropout;
    c.lr = lr;
    c.weight_decay = weight_decay;
    return c;
  }
};

void append_jsonl(const std::string& path, const nlohmann::json& record) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open report file '" + path + "'");
  out << record.dump() << '\n';
}

std::string fmt_metric(const MetricSummary& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f +- %.3f", s.mean, s.std);
  return buf;
}

std::string fmt_value(double v) {
  if (std::isnan(v)) return "  -  ";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

void print_class_counts(const DatasetBundle& b) {
  const auto counts = class_counts(b.labels, b.split.train, b.num_classes());
  std::cout << "train counts per class:";
  for (Index c = 0; c < b.num_classes(); ++c) std::cout << ' ' << b.class_names[c] << '=' << counts[c];
  std::cout << '\n';
}

int cmd_ingest(const std::string& content, const std::string& cites, const std::string& rule,
               const std::string& hyperedges, const std::string& synth, std::string name, const std::string& protocol,
               std::uint64_t seed, const std::string& out) {
  DatasetBundle b;
  if (!synth.empty()) {
    b = synth_imbalanced(parse_synth(synth, seed));
    if (!name.empty()) b.name = name;
  } else {
    if (content.empty()) throw std::invalid_argument("--content is required unless --synth is given");
    if (!fs::exists(content)) throw std::runtime_error("content file not found: " + content);
    auto table = load_content(content);
    if (name.empty()) name = fs::path(content).stem().string();
    b.name = name;
    b.rule = rule;
    b.seed = seed;
    if (rule == "cocitation") {
      if (cites.empty()) throw std::invalid_argument("--cites is required for the cocitation rule");
      if (!fs::exists(cites)) throw std::runtime_error("cites file not found: " + cites);
      auto cg = cocitation_hypergraph(table, cites);
      b.graph = std::move(cg.graph);
      if (cg.skipped_citations) {
        std::cerr << "warning: skipped " << cg.skipped_citations << " citation(s) naming unknown paper ids\n";
      }
      b.meta["skipped_citations"] = cg.skipped_citations;
      b.meta["dropped_hyperedges"] = cg.dropped_hyperedges;
    } else if (rule == "hyperedge-list") {
      if (hyperedges.empty()) throw std::invalid_argument("--hyperedges is required for the hyperedge-list rule");
      if (!fs::exists(hyperedges)) throw std::runtime_error("hyperedge file not found: " + hyperedges);
      b.graph = load_hyperedge_list(hyperedges, static_cast<Index>(table.ids.size()));
    } else {
      throw std::invalid_argument("unknown rule '" + rule + "' (expected cocitation or hyperedge-list)");
    }
    b.features = std::move(table.features);
    b.labels = std::move(table.labels);
    b.class_names = std::move(table.class_names);
    const SplitProtocol p = protocol.empty() ? split_protocol_for(b.name) : parse_protocol(protocol);
    b.split = make_split(b.labels, b.num_classes(), p, seed);
    b.meta["protocol"] = {p.train, p.val, p.test};
  }
  save_bundle(out, b);
  std::cout << "wrote " << out << ": " << b.graph.num_nodes() << " nodes, " << b.graph.num_hyperedges()
            << " hyperedges, " << b.features.cols() << " features, " << b.num_classes() << " classes\n";
  print_class_counts(b);
  return 0;
}

std::optional<SplitProtocol> protocol_of(const DatasetBundle& b, bool resplit) {
  if (!resplit) return std::nullopt;
  if (!b.meta.contains("protocol")) throw std::invalid_argument("--resplit needs a bundle with a split protocol");
  const auto p = b.meta["protocol"].get<std::vector<Index>>();
  return SplitProtocol{p.at(0), p.at(1), p.at(2)};
}

int cmd_augment(const std::string& in, const AugmentArgs& args, std::uint64_t seed, const std::string& out,
                std::string plan_out) {
  auto cfg = args.config();
  cfg.seed = seed;
  const auto bundle = load_bundle(in);
  const auto result = augment(bundle, cfg);
  save_bundle(out, result.expanded);
  if (plan_out.empty()) plan_out = out + ".plan";
  save_plan(plan_out, result.plan, {seed, to_string(cfg.variant), to_string(cfg.plan.count), bundle.name});
  std::cout << "decoder final BCE: " << result.decoder.final_loss << '\n';
  std::cout << "augmented nodes: " << result.plan.entries.size() << " (";
  for (std::size_t k = 0; k < result.plan.minority_classes.size(); ++k) {
    const Index c = result.plan.minority_classes[k];
    std::cout << (k ? ", " : "") << bundle.class_names[c] << " +" << result.plan.per_class_added[c];
  }
  std::cout << ")\nwrote " << out << " and " << plan_out << '\n';
  print_class_counts(result.expanded);
  return 0;
}

struct RowResult {
  std::string name;
  AggregateReport agg;
};

void print_table(const std::vector<RowResult>& rows, const std::string& table, const std::string& dataset) {
  std::printf("%-22s %-18s %-18s %-9s %-9s\n", "row", "accuracy", "macro-F1", "rep.acc", "rep.F1");
  for (const auto& r : rows) {
    const auto rep = table.empty() ? ReportedValue{NAN, NAN} : reported(table, r.name, dataset);
    std::printf("%-22s %-18s %-18s %-9s %-9s\n", r.name.c_str(), fmt_metric(r.agg.accuracy).c_str(),
                fmt_metric(r.agg.macro_f1).c_str(), fmt_value(rep.accuracy).c_str(), fmt_value(rep.macro_f1).c_str());
  }
}

RowResult run_row(const std::string& name, const DatasetBundle& bundle, const ExperimentConfig& cfg,
                  const std::vector<std::uint64_t>& seeds, const std::string& reports) {
  std::vector<EvalReport> per_seed;
  for (auto seed : seeds) {
    per_seed.push_back(run_experiment(bundle, cfg, seed));
    auto rec = to_json(per_seed.back());
    rec["row"] = name;
    append_jsonl(reports, rec);
    std::cerr << "  " << name << " seed " << seed << ": acc " << per_seed.back().accuracy << " macro-F1 "
              << per_seed.back().macro_f1 << '\n';
  }
  return {name, aggregate(per_seed)};
}

int cmd_train(const std::string& in, const TrainArgs& targs, const AugmentArgs& aargs, const std::string& sweep,
              const std::string& out_dir, const std::string& reports) {
  const auto bundle = load_bundle(in);
  const auto seeds = parse_seeds(targs.seeds);
  const auto tcfg = targs.config();

  if (!sweep.empty()) {
    const auto eq = sweep.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--sweep expects key=v1,v2,...");
    const std::string key = sweep.substr(0, eq);
    // All values are validated before any run starts.
    std::vector<std::pair<std::string, ExperimentConfig>> grid;
    for (const auto& value : split_list(sweep.substr(eq + 1), ',')) {
      AugmentArgs a = aargs;
      if (key == "variant") a.variant = value;
      else if (key == "count") a.count = value;
      else if (key == "tau") a.tau = std::stod(value);
      else throw std::invalid_argument("unknown sweep key '" + key + "' (variant, count, tau)");
      ExperimentConfig cfg{value == "none" ? std::nullopt : std::optional(a.config()), tcfg,
                           protocol_of(bundle, targs.resplit)};
      grid.emplace_back(key + "=" + value, cfg);
    }
    std::vector<RowResult> rows;
    for (const auto& [row, cfg] : grid) rows.push_back(run_row(row, bundle, cfg, seeds, reports));
    print_table(rows, "", bundle.name);
    return 0;
  }

  if (!out_dir.empty()) fs::create_directories(out_dir);
  std::vector<EvalReport> per_seed;
  for (auto seed : seeds) {
    TrainConfig c = tcfg;
    c.seed = seed;
    DatasetBundle b = bundle;
    if (auto p = protocol_of(bundle, targs.resplit)) b.split = make_split(b.labels, b.num_classes(), *p, seed);
    const std::string label = bundle.meta.contains("augmentation") ? bundle.meta["augmentation"].dump() : "baseline";
    auto run = train_and_evaluate(b, c, label);
    if (!out_dir.empty()) {
      const auto path = fs::path(out_dir) / ("checkpoint_seed" + std::to_string(seed) + ".hsmk");
      save_checkpoint(path, {run.train.model, c, bundle.name, run.train.best_epoch});
    }
    append_jsonl(reports, to_json(run.test));
    std::cout << "seed " << seed << ": best epoch " << run.train.best_epoch << ", test acc " << run.test.accuracy
              << ", macro-F1 " << run.test.macro_f1 << '\n';
    per_seed.push_back(std::move(run.test));
  }
  const auto agg = aggregate(per_seed);
  std::cout << "mean over " << seeds.size() << " seed(s): acc " << fmt_metric(agg.accuracy) << ", macro-F1 "
            << fmt_metric(agg.macro_f1) << '\n';
  append_jsonl(reports, to_json(agg));
  return 0;
}

int cmd_eval(const std::string& in, const std::string& checkpoint, const std::string& split_name,
             const std::string& reports) {
  const auto bundle = load_bundle(in);
  const auto ckpt = load_checkpoint(checkpoint);
  if (ckpt.model.in_dim() != bundle.features.cols()) {
    throw std::invalid_argument("checkpoint input width does not match the bundle's features");
  }
  const std::vector<Index>* rows = split_name == "test"    ? &bundle.split.test
                                   : split_name == "val"   ? &bundle.split.val
                                   : split_name == "train" ? &bundle.split.train
                                                           : nullptr;
  if (!rows) throw std::invalid_argument("--split must be train, val or test");
  const auto pred = argmax_rows(predict_logits(ckpt.model, bundle.graph, bundle.features));
  std::vector<Index> p, t;
  for (Index i : *rows) {
    p.push_back(pred[i]);
    t.push_back(bundle.labels[i]);
  }
  const auto report = evaluate(p, t, bundle.num_classes(), split_name, checkpoint, ckpt.config.seed);
  append_jsonl(reports, to_json(report));
  std::printf("%s accuracy %.4f macro-F1 %.4f\n", split_name.c_str(), report.accuracy, report.macro_f1);
  std::printf("%-16s %-9s %-9s %-9s %s\n", "class", "precision", "recall", "f1", "support");
  for (Index c = 0; c < bundle.num_classes(); ++c) {
    const auto& s = report.per_class[c];
    std::printf("%-16s %-9.3f %-9.3f %-9.3f %lld\n", bundle.class_names[c].c_str(), s.precision, s.recall, s.f1,
                static_cast<long long>(s.support));
  }
  return 0;
}

int cmd_repro(const std::string& table, const std::string& dataset_path, std::string name, const TrainArgs& targs,
              const AugmentArgs& aargs, const std::string& reports) {
  const auto bundle = load_bundle(dataset_path);
  if (name.empty()) name = bundle.name;
  const auto seeds = parse_seeds(targs.seeds);
  const auto tcfg = targs.config();
  const auto protocol = protocol_of(bundle, targs.resplit);

  auto with = [&](auto mutate) {
    AugmentArgs a = aargs;
    mutate(a);
    return ExperimentConfig{a.config(), tcfg, protocol};
  };

  std::vector<std::pair<std::string, ExperimentConfig>> grid;
  if (table == "I") {
    grid.emplace_back("HGNN", ExperimentConfig{std::nullopt, tcfg, protocol});
    grid.emplace_back("HyperSMOTE", with([](AugmentArgs&) {}));
  } else if (table == "III") {
    grid.emplace_back("1-Sample", with([](AugmentArgs& a) { a.count = "1"; }));
    grid.emplace_back("3-Sample", with([](AugmentArgs& a) { a.count = "3"; }));
    grid.emplace_back("Adaptive-Sample", with([](AugmentArgs& a) { a.count = "adaptive"; }));
  } else if (table == "IV") {
    grid.emplace_back("Random", with([](AugmentArgs& a) { a.variant = "random"; }));
    grid.emplace_back("Closest Node", with([](AugmentArgs& a) { a.variant = "closest-node"; }));
    grid.emplace_back("Closest Hyperedge", with([](AugmentArgs& a) { a.variant = "closest-hyperedge"; }));
    grid.emplace_back("Decoder", with([](AugmentArgs& a) { a.variant = "decoder"; }));
  } else {
    throw std::invalid_argument("--table must be I, III or IV");
  }

  std::vector<RowResult> rows;
  for (const auto& [row, cfg] : grid) rows.push_back(run_row(row, bundle, cfg, seeds, reports));
  std::cout << "table " << table << " on " << name << " (" << seeds.size() << " seeds, mean +- std)\n";
  print_table(rows, table, name);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HyperSMOTE: hypergraph minority oversampling and hypergraph-convolution node classification"};
  app.require_subcommand(1);

  std::string content, cites, rule = "cocitation", hyperedges, synth, name, protocol, out;
  std::uint64_t seed = 0;
  auto* ingest = app.add_subcommand("ingest", "build a dataset bundle artifact");
  ingest->add_option("--content", content, "tab-separated content file");
  ingest->add_option("--cites", cites, "tab-separated cites file");
  ingest->add_option("--rule", rule, "cocitation | hyperedge-list")->capture_default_str();
  ingest->add_option("--hyperedges", hyperedges, "hyperedge list file (hyperedge-list rule)");
  ingest->add_option("--synth", synth, "synthetic options, e.g. classes=2,counts=40:4,homophily=0.9");
  ingest->add_option("--name", name, "dataset name (selects the split protocol)");
  ingest->add_option("--protocol", protocol, "train,val,test sizes");
  ingest->add_option("--seed", seed, "split / generator seed")->capture_default_str();
  ingest->add_option("--out", out, "output artifact")->required();

  std::string in, plan_out;
  AugmentArgs aug_args;
  auto* augment_cmd = app.add_subcommand("augment", "decoder pretraining, synthesis and hyperedge attachment");
  augment_cmd->add_option("--in", in, "bundle artifact")->required();
  aug_args.add_to(augment_cmd);
  augment_cmd->add_option("--seed", seed)->capture_default_str();
  augment_cmd->add_option("--out", out, "expanded bundle artifact")->required();
  augment_cmd->add_option("--plan-out", plan_out, "plan artifact (default: <out>.plan)");

  TrainArgs train_args;
  AugmentArgs sweep_args;
  std::string sweep, out_dir, reports;
  auto* train = app.add_subcommand("train", "train and test the classifier over a seed list");
  train->add_option("--in", in, "bundle or expanded bundle artifact")->required();
  train_args.add_to(train);
  sweep_args.add_to(train);
  train->add_option("--sweep", sweep, "augment the input per value: variant=..., count=..., tau=... ('none' = baseline)");
  train->add_option("--out-dir", out_dir, "directory for per-seed checkpoints");
  train->add_option("--reports", reports, "append line-delimited JSON reports here");

  std::string checkpoint, split_name = "test";
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a bundle split");
  eval->add_option("--in", in, "bundle artifact")->required();
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--split", split_name)->capture_default_str();
  eval->add_option("--reports", reports);

  std::string table;
  TrainArgs repro_train;
  AugmentArgs repro_aug;
  auto* repro = app.add_subcommand("repro", "run a preset table grid over the seed list");
  repro->add_option("--table", table, "I | III | IV")->required();
  repro->add_option("--dataset", in, "bundle artifact")->required();
  repro->add_option("--name", name, "dataset key for reported values (default: bundle name)");
  repro_train.add_to(repro);
  repro_aug.add_to(repro);
  repro->add_option("--reports", reports);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(content, cites, rule, hyperedges, synth, name, protocol, seed, out);
    if (*augment_cmd) return cmd_augment(in, aug_args, seed, out, plan_out);
    if (*train) return cmd_train(in, train_args, sweep_args, sweep, out_dir, reports);
    if (*eval) return cmd_eval(in, checkpoint, split_name, reports);
    if (*repro) return cmd_repro(table, in, name, repro_train, repro_aug, reports);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
