#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypersmote/expansion.hpp"
#include "hypersmote/hgconv.hpp"
#include "hypersmote/ingest.hpp"
#include "hypersmote/metrics.hpp"
#include "hypersmote/oversample.hpp"

namespace hypersmote {

struct AugmentConfig {
  PlanConfig plan;
  DecoderConfig decoder;
  AttachmentVariant variant = AttachmentVariant::DecoderArgmax;
  FeatureSpace space = FeatureSpace::Raw;
  std::uint64_t seed = 0;  // overrides plan/decoder/attachment seeds

  void validate() const;
  std::string describe() const;
};

struct AugmentOutput {
  TrainedDecoder decoder;
  AugmentationPlan plan;  // with attached hyperedges
  DatasetBundle expanded;
};

/// Decoder pretraining on the original incidence, neighbour-mean synthesis, then
/// attachment. Runs before (and independently of) classifier training.
AugmentOutput augment(const DatasetBundle& bundle, const AugmentConfig& config);

struct RunOutput {
  TrainResult train;
  EvalReport test;
};

RunOutput train_and_evaluate(const DatasetBundle& bundle, const TrainConfig& config, const std::string& label);

struct ExperimentConfig {
  std::optional<AugmentConfig> augment;  // empty: no-augmentation baseline
  TrainConfig train;
  /// Redraw the split from the bundle's protocol with the run seed.
  std::optional<SplitProtocol> resplit;

  std::string label() const;
};

EvalReport run_experiment(const DatasetBundle& bundle, const ExperimentConfig& config, std::uint64_t seed);

nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const AggregateReport& r);

/// Reference accuracy/Macro-F1 for the citation benchmarks, keyed by table
/// row. Missing entries are NaN.
struct ReportedValue {
  double accuracy;
  double macro_f1;
};
ReportedValue reported(const std::string& table, const std::string& row, const std::string& dataset);

}  // namespace hypersmote
