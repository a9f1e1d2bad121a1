#include "gaitattn/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "gaitattn/rng.hpp"
#include "json.hpp"

namespace gaitattn {

void PredictionSet::push(std::string tid, std::string pid, int lab, double sc) {
  trial_id.push_back(std::move(tid));
  patient_id.push_back(std::move(pid));
  label.push_back(lab);
  score.push_back(sc);
}

void PredictionSet::validate() const {
  if (trial_id.size() != label.size() || patient_id.size() != label.size() ||
      score.size() != label.size())
    throw ShapeError("prediction set: column length mismatch");
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (label[i] != 0 && label[i] != 1)
      throw ConfigError("prediction set: label must be 0 or 1 at row " + std::to_string(i));
    if (!(score[i] >= 0.0 && score[i] <= 1.0))
      throw ConfigError("prediction set: score outside [0, 1] at row " + std::to_string(i));
  }
}

PredictionSet PredictionSet::subset(const std::vector<std::size_t>& rows) const {
  PredictionSet out;
  out.trial_id.reserve(rows.size());
  for (std::size_t r : rows)
    out.push(trial_id[r], patient_id[r], label[r], score[r]);
  return out;
}

double roc_auc(const PredictionSet& p) {
  const std::size_t n = p.size();
  long long n_pos = 0;
  for (int l : p.label) n_pos += l;
  const long long n_neg = static_cast<long long>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw UndefinedMetricError("roc_auc undefined: needs both classes, got " +
                               std::to_string(n_pos) + " positives of " +
                               std::to_string(n));

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return p.score[a] < p.score[b]; });

  // Midranks over tied scores; rank sums of halves are exact in doubles, so
  // this matches the pairwise definition bit for bit.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && p.score[idx[j]] == p.score[idx[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (p.label[idx[k]] == 1) pos_rank_sum += midrank;
    i = j;
  }
  const double u = pos_rank_sum -
                   static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double pr_auc(const PredictionSet& p) {
  const std::size_t n = p.size();
  long long n_pos = 0;
  for (int l : p.label) n_pos += l;
  if (n_pos == 0)
    throw UndefinedMetricError("pr_auc undefined: no positive labels");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return p.score[a] > p.score[b]; });

  double ap = 0.0;
  double prev_recall = 0.0;
  long long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && p.score[idx[j]] == p.score[idx[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (p.label[idx[k]] == 1) ++tp;
      else ++fp;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

ConfusionCounts confusion(const PredictionSet& p, double threshold) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool pred_pos = p.score[i] >= threshold;
    if (p.label[i] == 1) (pred_pos ? c.tp : c.fn) += 1;
    else (pred_pos ? c.fp : c.tn) += 1;
  }
  return c;
}

double sensitivity(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0)
    throw UndefinedMetricError("sensitivity undefined: no positive labels");
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

double specificity(const ConfusionCounts& c) {
  if (c.tn + c.fp == 0)
    throw UndefinedMetricError("specificity undefined: no negative labels");
  return static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
}

double balanced_accuracy(const ConfusionCounts& c) {
  return (sensitivity(c) + specificity(c)) / 2.0;
}

double mcc(const ConfusionCounts& c) {
  const double f1 = static_cast<double>(c.tp + c.fp);
  const double f2 = static_cast<double>(c.tp + c.fn);
  const double f3 = static_cast<double>(c.tn + c.fp);
  const double f4 = static_cast<double>(c.tn + c.fn);
  if (f1 == 0.0 || f2 == 0.0 || f3 == 0.0 || f4 == 0.0) return 0.0;
  const double num = static_cast<double>(c.tp) * static_cast<double>(c.tn) -
                     static_cast<double>(c.fp) * static_cast<double>(c.fn);
  return num / std::sqrt(f1 * f2 * f3 * f4);
}

ScalarMetrics scalar_metrics(const ConfusionCounts& c) {
  ScalarMetrics s;
  s.sensitivity = sensitivity(c);
  s.specificity = specificity(c);
  s.balanced_accuracy = (s.sensitivity + s.specificity) / 2.0;
  s.mcc = mcc(c);
  return s;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double rank = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(rank));
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

MetricWithCI bootstrap_ci(const PredictionSet& p, const MetricFn& metric,
                          int n_bootstrap, std::uint64_t seed) {
  if (n_bootstrap < 1) throw ConfigError("bootstrap_ci: n_bootstrap must be >= 1");
  const std::size_t n = p.size();
  if (n == 0) throw ConfigError("bootstrap_ci: empty prediction set");

  MetricWithCI out;
  out.n_bootstrap = n_bootstrap;
  out.point = metric(p);  // undefined on the full set propagates to the caller

  Rng rng(seed);
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(n_bootstrap));
  // Single-class resamples are discarded and redrawn; a pathologically
  // imbalanced input would loop forever, hence the cap.
  const long long max_attempts = 50LL * n_bootstrap;
  long long attempts = 0;
  std::vector<std::size_t> rows(n);
  while (stats.size() < static_cast<std::size_t>(n_bootstrap)) {
    if (++attempts > max_attempts)
      throw UndefinedMetricError(
          "bootstrap_ci: retry cap exhausted; metric undefined on almost every "
          "resample of this input");
    for (std::size_t i = 0; i < n; ++i)
      rows[i] = static_cast<std::size_t>(rng.bounded(n));
    try {
      stats.push_back(metric(p.subset(rows)));
    } catch (const UndefinedMetricError&) {
      continue;
    }
  }
  out.ci_low = percentile(stats, 0.025);
  out.ci_high = percentile(stats, 0.975);
  return out;
}

void save_predictions(const PredictionSet& p, const std::string& path) {
  p.validate();
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open predictions for writing: " + path);
  os << "trial_id,patient_id,label,score\n";
  char buf[40];
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", p.score[i]);
    os << p.trial_id[i] << ',' << p.patient_id[i] << ',' << p.label[i] << ',' << buf << '\n';
  }
  if (!os) throw IoError("write failure on predictions: " + path);
}

PredictionSet load_predictions(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open predictions: " + path);
  std::string line;
  if (!std::getline(is, line)) throw ParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "trial_id,patient_id,label,score")
    throw ParseError(path + ": malformed header");
  PredictionSet p;
  std::size_t row_no = 1;
  while (std::getline(is, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                  : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cells.size() != 4)
      throw ParseError(path + ": row " + std::to_string(row_no) +
                       " has " + std::to_string(cells.size()) + " columns; expected 4");
    int lab = 0;
    double sc = 0.0;
    auto r1 = std::from_chars(cells[2].data(), cells[2].data() + cells[2].size(), lab);
    auto r2 = std::from_chars(cells[3].data(), cells[3].data() + cells[3].size(), sc);
    if (r1.ec != std::errc() || r2.ec != std::errc())
      throw ParseError(path + ": non-numeric cell at row " + std::to_string(row_no));
    p.push(cells[0], cells[1], lab, sc);
  }
  p.validate();
  return p;
}

std::string metrics_report_json(const PredictionSet& p, int n_bootstrap,
                                std::uint64_t seed, double threshold) {
  p.validate();
  nlohmann::json j;
  j["n"] = p.size();
  j["threshold"] = threshold;
  j["n_bootstrap"] = n_bootstrap;
  j["ci_level"] = 0.95;
  j["ci_method"] = "percentile";
  j["bootstrap_unit"] = "trial";

  auto with_ci = [&](const MetricFn& fn) {
    const MetricWithCI m = bootstrap_ci(p, fn, n_bootstrap, seed);
    return nlohmann::json{{"point", m.point}, {"ci_low", m.ci_low}, {"ci_high", m.ci_high}};
  };
  nlohmann::json metrics;
  metrics["roc_auc"] = with_ci([](const PredictionSet& q) { return roc_auc(q); });
  metrics["pr_auc"] = with_ci([](const PredictionSet& q) { return pr_auc(q); });
  metrics["balanced_accuracy"] = with_ci(
      [threshold](const PredictionSet& q) { return balanced_accuracy(confusion(q, threshold)); });
  metrics["mcc"] = with_ci(
      [threshold](const PredictionSet& q) { return mcc(confusion(q, threshold)); });
  metrics["sensitivity"] = with_ci(
      [threshold](const PredictionSet& q) { return sensitivity(confusion(q, threshold)); });
  metrics["specificity"] = with_ci(
      [threshold](const PredictionSet& q) { return specificity(confusion(q, threshold)); });
  j["metrics"] = metrics;
  return j.dump(2);
}

}  // namespace gaitattn
