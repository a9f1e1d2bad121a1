#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gaitattn/errors.hpp"

namespace gaitattn {

// Parallel columns of test-set predictions; scores are sigmoid(logit).
struct PredictionSet {
  std::vector<std::string> trial_id;
  std::vector<std::string> patient_id;
  std::vector<int> label;      // 0 or 1
  std::vector<double> score;   // in [0, 1]

  std::size_t size() const { return label.size(); }
  void push(std::string tid, std::string pid, int lab, double sc);
  void validate() const;
  PredictionSet subset(const std::vector<std::size_t>& rows) const;
};

struct ConfusionCounts {
  long long tp = 0, fp = 0, tn = 0, fn = 0;
  long long total() const { return tp + fp + tn + fn; }
};

struct MetricWithCI {
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n_bootstrap = 1000;
  double ci_level = 0.95;
};

// Mann-Whitney ROC-AUC: fraction of (positive, negative) pairs ranked
// correctly, ties counted 1/2. Computed via midranks, which is exact.
double roc_auc(const PredictionSet& p);

// Average precision over descending unique-score thresholds, ties handled
// as one block: sum of (delta recall) * precision.
double pr_auc(const PredictionSet& p);

// Hard decisions at `threshold`; predicted positive iff score >= threshold.
ConfusionCounts confusion(const PredictionSet& p, double threshold = 0.5);

double sensitivity(const ConfusionCounts& c);
double specificity(const ConfusionCounts& c);
double balanced_accuracy(const ConfusionCounts& c);
double mcc(const ConfusionCounts& c);  // 0 when any denominator factor is 0

struct ScalarMetrics {
  double balanced_accuracy = 0.0;
  double mcc = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
};
ScalarMetrics scalar_metrics(const ConfusionCounts& c);

using MetricFn = std::function<double(const PredictionSet&)>;

// Percentile bootstrap over prediction rows (trials). Resamples where the
// metric is undefined are redrawn up to a retry cap; the point estimate is
// computed on the full set.
MetricWithCI bootstrap_ci(const PredictionSet& p, const MetricFn& metric,
                          int n_bootstrap, std::uint64_t seed);

// Empirical quantile with linear interpolation (values need not be sorted).
double percentile(std::vector<double> values, double q);

// CSV `trial_id,patient_id,label,score` round-trip.
void save_predictions(const PredictionSet& p, const std::string& path);
PredictionSet load_predictions(const std::string& path);

// Full Table-1-style report (each metric with its CI) as a JSON string.
std::string metrics_report_json(const PredictionSet& p, int n_bootstrap,
                                std::uint64_t seed, double threshold = 0.5);

}  // namespace gaitattn
