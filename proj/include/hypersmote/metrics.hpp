#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hypersmote/hypergraph.hpp"

namespace hypersmote {

double accuracy(std::span<const Index> pred, std::span<const Index> truth);

/// Unweighted mean of per-class F1. Classes absent from both prediction and
/// truth count as F1 = 0; their ids are appended to `absent` when given.
double macro_f1(std::span<const Index> pred, std::span<const Index> truth, Index num_classes,
                std::vector<Index>* absent = nullptr);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Index support = 0;
};

struct EvalReport {
  std::string split;
  std::string config;  // identifies the run configuration for aggregation
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassScores> per_class;
  std::vector<std::vector<Index>> confusion;  // [truth][pred]
  std::vector<Index> absent_classes;
};

EvalReport evaluate(std::span<const Index> pred, std::span<const Index> truth, Index num_classes,
                    std::string split = "test", std::string config = {}, std::uint64_t seed = 0);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single report
};

struct AggregateReport {
  std::string split;
  std::string config;
  std::size_t count = 0;
  MetricSummary accuracy;
  MetricSummary macro_f1;
  std::vector<MetricSummary> recall;  // per class
};

MetricSummary summarize(std::span<const double> values);

/// Reports must share split and config.
AggregateReport aggregate(std::span<const EvalReport> reports);

}  // namespace hypersmote
