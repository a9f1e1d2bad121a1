#include "gaitattn/audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "gaitattn/metrics.hpp"
#include "gaitattn/rng.hpp"

namespace gaitattn {

int SensorImportanceMap::sensor_index(const std::string& name) const {
  for (std::size_t i = 0; i < sensors.size(); ++i)
    if (sensors[i] == name) return static_cast<int>(i);
  throw ConfigError("unknown sensor '" + name + "'");
}

std::string to_string(FlagSeverity s) {
  switch (s) {
    case FlagSeverity::kInfo: return "info";
    case FlagSeverity::kWarning: return "warning";
    case FlagSeverity::kCritical: return "critical";
  }
  throw ConfigError("unknown severity");
}

namespace {

// Shared bootstrap engine for vector-valued means: one index draw per
// resample, percentile CI per component.
SensorImportanceMap aggregate_rows(const std::vector<std::array<double, 4>>& rows,
                                   int n_bootstrap, std::uint64_t seed) {
  if (rows.empty()) throw ConfigError("aggregate_attention: no records");
  if (n_bootstrap < 1) throw ConfigError("aggregate_attention: n_bootstrap must be >= 1");

  SensorImportanceMap map;
  map.n_trials = static_cast<int>(rows.size());
  map.n_bootstrap = n_bootstrap;

  const std::size_t n = rows.size();
  for (const auto& r : rows)
    for (int s = 0; s < 4; ++s) map.mean[static_cast<std::size_t>(s)] += r[static_cast<std::size_t>(s)];
  for (int s = 0; s < 4; ++s) map.mean[static_cast<std::size_t>(s)] /= static_cast<double>(n);

  Rng rng(seed);
  std::array<std::vector<double>, 4> stats;
  for (auto& v : stats) v.reserve(static_cast<std::size_t>(n_bootstrap));
  for (int b = 0; b < n_bootstrap; ++b) {
    std::array<double, 4> acc = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = rows[static_cast<std::size_t>(rng.bounded(n))];
      for (int s = 0; s < 4; ++s) acc[static_cast<std::size_t>(s)] += r[static_cast<std::size_t>(s)];
    }
    for (int s = 0; s < 4; ++s)
      stats[static_cast<std::size_t>(s)].push_back(acc[static_cast<std::size_t>(s)] /
                                                   static_cast<double>(n));
  }
  for (int s = 0; s < 4; ++s) {
    map.ci_low[static_cast<std::size_t>(s)] = percentile(stats[static_cast<std::size_t>(s)], 0.025);
    map.ci_high[static_cast<std::size_t>(s)] = percentile(stats[static_cast<std::size_t>(s)], 0.975);
  }
  return map;
}

std::array<double, 4> alpha_of(const AttentionRecord& rec) {
  if (rec.alpha.size() != 4)
    throw ShapeError("attention record '" + rec.trial_id + "' does not have 4 sensors");
  return {rec.alpha[0], rec.alpha[1], rec.alpha[2], rec.alpha[3]};
}

}  // namespace

SensorImportanceMap aggregate_attention(const std::vector<AttentionRecord>& records,
                                        int n_bootstrap, std::uint64_t seed) {
  std::vector<std::array<double, 4>> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(alpha_of(r));
  return aggregate_rows(rows, n_bootstrap, seed);
}

SensorImportanceMap aggregate_attention_by_patient(
    const std::vector<AttentionRecord>& records,
    const std::vector<std::string>& patient_ids, int n_bootstrap, std::uint64_t seed) {
  if (records.size() != patient_ids.size())
    throw ShapeError("aggregate_attention_by_patient: id/record count mismatch");
  std::map<std::string, std::pair<std::array<double, 4>, int>> acc;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& [sums, count] = acc[patient_ids[i]];
    const auto a = alpha_of(records[i]);
    for (int s = 0; s < 4; ++s) sums[static_cast<std::size_t>(s)] += a[static_cast<std::size_t>(s)];
    count += 1;
  }
  std::vector<std::array<double, 4>> rows;
  rows.reserve(acc.size());
  for (const auto& [pid, entry] : acc) {
    std::array<double, 4> mean;
    for (int s = 0; s < 4; ++s)
      mean[static_cast<std::size_t>(s)] =
          entry.first[static_cast<std::size_t>(s)] / entry.second;
    rows.push_back(mean);
  }
  return aggregate_rows(rows, n_bootstrap, seed);
}

std::vector<BiasFlag> flag_laterality_bias(
    const SensorImportanceMap& map,
    const std::vector<std::pair<std::string, std::string>>& bilateral_pairs,
    double neglect_threshold, double dominance_threshold) {
  std::vector<BiasFlag> flags;
  char buf[256];
  for (const auto& [a, b] : bilateral_pairs) {
    const int ia = map.sensor_index(a);
    const int ib = map.sensor_index(b);
    // Check both directions of the pair.
    const int order[2][2] = {{ia, ib}, {ib, ia}};
    for (const auto& dir : order) {
      const int neglected = dir[0], partner = dir[1];
      const double neg_hi = map.ci_high[static_cast<std::size_t>(neglected)];
      const double par_mean = map.mean[static_cast<std::size_t>(partner)];
      if (neg_hi >= neglect_threshold) continue;
      BiasFlag f;
      f.flagged_sensor = map.sensors[static_cast<std::size_t>(neglected)];
      f.partner_sensor = map.sensors[static_cast<std::size_t>(partner)];
      f.neglected_ci_high = neg_hi;
      f.partner_mean = par_mean;
      if (par_mean > dominance_threshold) {
        f.severity = FlagSeverity::kCritical;
        f.rule = "neglect+dominance";
        std::snprintf(buf, sizeof(buf),
                      "sensor %s is confidently ignored (ci_high %.4f < %.2f) while "
                      "bilateral partner %s dominates (mean %.4f > %.2f); this "
                      "pattern indicates a laterality confound, not a clinical finding",
                      f.flagged_sensor.c_str(), neg_hi, neglect_threshold,
                      f.partner_sensor.c_str(), par_mean, dominance_threshold);
      } else {
        f.severity = FlagSeverity::kWarning;
        f.rule = "neglect";
        std::snprintf(buf, sizeof(buf),
                      "sensor %s is confidently ignored (ci_high %.4f < %.2f) "
                      "without a dominant bilateral partner (%s mean %.4f)",
                      f.flagged_sensor.c_str(), neg_hi, neglect_threshold,
                      f.partner_sensor.c_str(), par_mean);
      }
      f.rationale = buf;
      flags.push_back(std::move(f));
    }
  }
  return flags;
}

}  // namespace gaitattn
