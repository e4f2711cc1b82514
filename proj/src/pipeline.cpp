#include "hypersmote/pipeline.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hypersmote {

void AugmentConfig::validate() const {
  if (plan.tau < 0.0 || plan.tau > 1.0) throw std::invalid_argument("tau must lie in [0, 1]");
  if (const auto* f = std::get_if<FixedCount>(&plan.count); f && f->n < 1) {
    throw std::invalid_argument("augmentation count must be positive");
  }
  if (plan.minority.num_minority_classes < 1) throw std::invalid_argument("need at least one minority class");
  if (decoder.hidden_dim < 1 || decoder.epochs < 0) throw std::invalid_argument("invalid decoder settings");
  if (decoder.negative_ratio < 0.0) throw std::invalid_argument("negative ratio must be >= 0");
}

std::string AugmentConfig::describe() const {
  std::ostringstream s;
  s << "variant=" << to_string(variant) << ",tau=" << plan.tau << ",count=" << to_string(plan.count)
    << ",minority=" << plan.minority.num_minority_classes << ",space=" << to_string(space);
  return s.str();
}

AugmentOutput augment(const DatasetBundle& bundle, const AugmentConfig& config) {
  config.validate();
  bundle.validate();
  DecoderConfig dcfg = config.decoder;
  dcfg.seed = config.seed;
  PlanConfig pcfg = config.plan;
  pcfg.seed = config.seed;

  AugmentOutput out;
  out.decoder = train_decoder(bundle.graph, bundle.features, dcfg);
  auto plan = build_plan(bundle.graph, out.decoder.node_embs, bundle.features, bundle.labels, bundle.num_classes(),
                         bundle.split, pcfg);
  auto result = expand({bundle.graph, bundle.features, bundle.labels, bundle.split}, std::move(plan), config.variant,
                       out.decoder, config.space, config.seed);
  out.plan = result.plan;

  DatasetBundle& e = out.expanded;
  e.name = bundle.name;
  e.rule = bundle.rule;
  e.seed = bundle.seed;
  e.class_names = bundle.class_names;
  e.graph = std::move(result.graph);
  e.features = std::move(result.features);
  e.labels = std::move(result.labels);
  e.split = std::move(result.split);
  e.meta = bundle.meta;
  e.meta["augmentation"] = {{"seed", config.seed},
                            {"variant", to_string(config.variant)},
                            {"tau", config.plan.tau},
                            {"count_policy", to_string(config.plan.count)},
                            {"feature_space", to_string(config.space)},
                            {"minority_classes", out.plan.minority_classes},
                            {"per_class_added", out.plan.per_class_added},
                            {"original_nodes", bundle.graph.num_nodes()},
                            {"decoder_epochs", dcfg.epochs},
                            {"decoder_final_bce", out.decoder.final_loss}};
  return out;
}

RunOutput train_and_evaluate(const DatasetBundle& bundle, const TrainConfig& config, const std::string& label) {
  bundle.validate();
  RunOutput out;
  out.train = train_classifier(bundle.graph, bundle.features, bundle.labels, bundle.num_classes(), bundle.split, config);
  const auto pred = argmax_rows(predict_logits(out.train.model, bundle.graph, bundle.features));
  std::vector<Index> p, t;
  for (Index i : bundle.split.test) {
    p.push_back(pred[i]);
    t.push_back(bundle.labels[i]);
  }
  out.test = evaluate(p, t, bundle.num_classes(), "test", label, config.seed);
  return out;
}

std::string ExperimentConfig::label() const {
  std::ostringstream s;
  s << (augment ? augment->describe() : std::string("baseline")) << ",hidden=" << train.model.hidden_dim
    << ",epochs=" << train.epochs;
  return s.str();
}

EvalReport run_experiment(const DatasetBundle& bundle, const ExperimentConfig& config, std::uint64_t seed) {
  DatasetBundle base = bundle;
  if (config.resplit) {
    base.split = make_split(base.labels, base.num_classes(), *config.resplit, seed);
  }
  TrainConfig tcfg = config.train;
  tcfg.seed = seed;
  if (!config.augment) return train_and_evaluate(base, tcfg, config.label()).test;
  AugmentConfig acfg = *config.augment;
  acfg.seed = seed;
  return train_and_evaluate(augment(base, acfg).expanded, tcfg, config.label()).test;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& c : r.per_class) {
    per_class.push_back({{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}});
  }
  return {{"split", r.split},       {"config", r.config},       {"seed", r.seed},
          {"accuracy", r.accuracy}, {"macro_f1", r.macro_f1},   {"per_class", per_class},
          {"confusion", r.confusion}, {"absent_classes", r.absent_classes}};
}

nlohmann::json to_json(const AggregateReport& r) {
  nlohmann::json recall = nlohmann::json::array();
  for (const auto& s : r.recall) recall.push_back({{"mean", s.mean}, {"std", s.std}});
  return {{"split", r.split},
          {"config", r.config},
          {"count", r.count},
          {"accuracy", {{"mean", r.accuracy.mean}, {"std", r.accuracy.std}}},
          {"macro_f1", {{"mean", r.macro_f1.mean}, {"std", r.macro_f1.std}}},
          {"recall", recall}};
}

ReportedValue reported(const std::string& table, const std::string& row, const std::string& dataset) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  // {table, row, dataset} -> {acc, f1}
  static const std::map<std::tuple<std::string, std::string, std::string>, ReportedValue> values = {
      {{"I", "HGNN", "cora"}, {0.771, 0.759}},
      {{"I", "HGNN", "cora-ca"}, {0.714, 0.699}},
      {{"I", "HGNN", "citeseer"}, {0.640, 0.626}},
      {{"I", "HyperSMOTE", "cora"}, {0.793, 0.784}},
      {{"I", "HyperSMOTE", "cora-ca"}, {0.726, 0.715}},
      {{"I", "HyperSMOTE", "citeseer"}, {0.672, 0.663}},
      {{"III", "1-Sample", "cora"}, {0.771, nan}},
      {{"III", "1-Sample", "cora-ca"}, {0.720, nan}},
      {{"III", "1-Sample", "citeseer"}, {0.665, nan}},
      {{"III", "3-Sample", "cora"}, {0.789, nan}},
      {{"III", "3-Sample", "cora-ca"}, {0.726, nan}},
      {{"III", "3-Sample", "citeseer"}, {0.669, nan}},
      {{"III", "Adaptive-Sample", "cora"}, {0.793, nan}},
      {{"III", "Adaptive-Sample", "cora-ca"}, {0.725, nan}},
      {{"III", "Adaptive-Sample", "citeseer"}, {0.672, nan}},
      {{"IV", "Random", "cora"}, {0.757, nan}},
      {{"IV", "Random", "cora-ca"}, {0.703, nan}},
      {{"IV", "Random", "citeseer"}, {0.636, nan}},
      {{"IV", "Closest Node", "cora"}, {0.791, nan}},
      {{"IV", "Closest Node", "cora-ca"}, {0.720, nan}},
      {{"IV", "Closest Node", "citeseer"}, {0.667, nan}},
      {{"IV", "Closest Hyperedge", "cora"}, {0.793, nan}},
      {{"IV", "Closest Hyperedge", "cora-ca"}, {0.726, nan}},
      {{"IV", "Closest Hyperedge", "citeseer"}, {0.672, nan}},
  };
  auto it = values.find({table, row, dataset});
  return it == values.end() ? ReportedValue{nan, nan} : it->second;
}

}  // namespace hypersmote
