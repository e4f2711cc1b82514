#include "hypersmote/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace hypersmote {

namespace {

void check_inputs(std::span<const Index> pred, std::span<const Index> truth) {
  if (pred.empty()) throw std::invalid_argument("metrics: empty input");
  if (pred.size() != truth.size()) throw std::invalid_argument("metrics: prediction/truth length mismatch");
}

std::vector<std::vector<Index>> confusion_matrix(std::span<const Index> pred, std::span<const Index> truth,
                                                 Index num_classes) {
  std::vector<std::vector<Index>> cm(static_cast<std::size_t>(num_classes),
                                     std::vector<Index>(static_cast<std::size_t>(num_classes), 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= num_classes || truth[i] < 0 || truth[i] >= num_classes) {
      throw std::out_of_range("metrics: label out of range");
    }
    ++cm[truth[i]][pred[i]];
  }
  return cm;
}

std::vector<ClassScores> class_scores(const std::vector<std::vector<Index>>& cm) {
  const std::size_t n = cm.size();
  std::vector<ClassScores> out(n);
  for (std::size_t c = 0; c < n; ++c) {
    Index tp = cm[c][c], predicted = 0, actual = 0;
    for (std::size_t k = 0; k < n; ++k) {
      predicted += cm[k][c];
      actual += cm[c][k];
    }
    auto& s = out[c];
    s.support = actual;
    s.precision = predicted ? static_cast<double>(tp) / predicted : 0.0;
    s.recall = actual ? static_cast<double>(tp) / actual : 0.0;
    s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  }
  return out;
}

}  // namespace

double accuracy(std::span<const Index> pred, std::span<const Index> truth) {
  check_inputs(pred, truth);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double macro_f1(std::span<const Index> pred, std::span<const Index> truth, Index num_classes,
                std::vector<Index>* absent) {
  check_inputs(pred, truth);
  const auto cm = confusion_matrix(pred, truth, num_classes);
  const auto scores = class_scores(cm);
  double total = 0.0;
  for (Index c = 0; c < num_classes; ++c) {
    total += scores[c].f1;
    if (absent) {
      Index predicted = 0;
      for (Index k = 0; k < num_classes; ++k) predicted += cm[k][c];
      if (scores[c].support == 0 && predicted == 0) absent->push_back(c);
    }
  }
  return total / static_cast<double>(num_classes);
}

EvalReport evaluate(std::span<const Index> pred, std::span<const Index> truth, Index num_classes, std::string split,
                    std::string config, std::uint64_t seed) {
  EvalReport r;
  r.split = std::move(split);
  r.config = std::move(config);
  r.seed = seed;
  r.accuracy = accuracy(pred, truth);
  r.macro_f1 = macro_f1(pred, truth, num_classes, &r.absent_classes);
  r.confusion = confusion_matrix(pred, truth, num_classes);
  r.per_class = class_scores(r.confusion);
  return r;
}

MetricSummary summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("summarize: no values");
  MetricSummary s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

AggregateReport aggregate(std::span<const EvalReport> reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate: no reports");
  AggregateReport out;
  out.split = reports.front().split;
  out.config = reports.front().config;
  out.count = reports.size();
  const std::size_t classes = reports.front().per_class.size();
  std::vector<double> acc, f1;
  std::vector<std::vector<double>> recall(classes);
  for (const auto& r : reports) {
    if (r.split != out.split || r.config != out.config || r.per_class.size() != classes) {
      throw std::invalid_argument("aggregate: reports come from different splits or configurations");
    }
    acc.push_back(r.accuracy);
    f1.push_back(r.macro_f1);
    for (std::size_t c = 0; c < classes; ++c) recall[c].push_back(r.per_class[c].recall);
  }
  out.accuracy = summarize(acc);
  out.macro_f1 = summarize(f1);
  for (const auto& v : recall) out.recall.push_back(summarize(v));
  return out;
}

}  // namespace hypersmote
