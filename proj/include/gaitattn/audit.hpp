#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gaitattn/model.hpp"

namespace gaitattn {

// Cohort-level mean attention per sensor with bootstrap CIs: the primary
// explanatory output of the whole pipeline.
struct SensorImportanceMap {
  std::string task;
  int n_trials = 0;
  std::array<std::string, 4> sensors = {"HE", "LB", "LF", "RF"};
  std::array<double, 4> mean = {0, 0, 0, 0};
  std::array<double, 4> ci_low = {0, 0, 0, 0};
  std::array<double, 4> ci_high = {0, 0, 0, 0};
  int n_bootstrap = 1000;

  int sensor_index(const std::string& name) const;
};

enum class FlagSeverity { kInfo, kWarning, kCritical };
std::string to_string(FlagSeverity s);

struct BiasFlag {
  std::string flagged_sensor;    // the neglected one
  std::string partner_sensor;
  std::string rule;              // which condition fired
  double neglected_ci_high = 0.0;
  double partner_mean = 0.0;
  FlagSeverity severity = FlagSeverity::kWarning;
  std::string rationale;
};

struct AuditOptions {
  double neglect_threshold = 0.05;
  double dominance_threshold = 0.50;
  int n_bootstrap = 1000;
  // Aggregation unit: trials (default) or patient means first.
  bool patient_level = false;
};

// Mean attention per sensor over records, with 95% percentile-bootstrap CIs
// from resampling records with replacement.
SensorImportanceMap aggregate_attention(const std::vector<AttentionRecord>& records,
                                        int n_bootstrap, std::uint64_t seed);

// Patient-level variant: records are first averaged within each patient
// (ids parallel to records), then patients are the bootstrap unit.
SensorImportanceMap aggregate_attention_by_patient(
    const std::vector<AttentionRecord>& records,
    const std::vector<std::string>& patient_ids, int n_bootstrap, std::uint64_t seed);

// Laterality audit over bilateral sensor pairs. For each pair: a critical
// flag when one side's ci_high falls below neglect_threshold while the
// partner's mean exceeds dominance_threshold; a warning when only the
// neglect condition holds. Flags inform, they never fail a run.
std::vector<BiasFlag> flag_laterality_bias(
    const SensorImportanceMap& map,
    const std::vector<std::pair<std::string, std::string>>& bilateral_pairs =
        {{"LF", "RF"}},
    double neglect_threshold = 0.05, double dominance_threshold = 0.50);

}  // namespace gaitattn
