#pragma once

#include <cstdint>
#include <string>

#include "gaitattn/trial.hpp"

namespace gaitattn {

enum class AnomalyKind { kAmplitudeDrop, kVariabilityBoost, kAxialTremor };

std::string to_string(AnomalyKind k);
AnomalyKind anomaly_from_string(const std::string& s);

// Synthetic cohort with a plantable laterality confound. Controls get
// quasi-periodic multi-harmonic gait on all sensors (feet strongest, lower
// back moderate, head weakest) plus Gaussian noise; patients additionally
// carry the configured anomaly. Foot anomalies land on the side drawn per
// patient from laterality_fraction_right; axial tremor adds a 4-6 Hz
// component on the head sensor instead.
struct SynthConfig {
  int n_controls = 30;
  int n_patients = 30;
  int trials_per_patient = 4;
  int trial_len = 512;  // samples at 100 Hz
  double laterality_fraction_right = 1.0;
  AnomalyKind anomaly = AnomalyKind::kAmplitudeDrop;
  double noise_std = 0.08;
  // Anomaly strengths. amplitude_drop scales the harmonic part of the
  // affected foot; variability_boost multiplies its noise; axial tremor
  // amplitude is relative to the head's base scale.
  double amplitude_drop_factor = 0.35;
  double variability_boost_factor = 3.0;
  double tremor_amplitude = 0.6;
  std::uint64_t seed = 0;
  std::string task_name = "synthetic-laterality";

  void validate() const;
};

// Writes trial CSVs under out_dir/trials/ plus out_dir/manifest.json and
// returns the manifest. Fully determined by cfg (including seed).
Manifest generate_synthetic(const SynthConfig& cfg, const std::string& out_dir);

// In-memory variant used by tests (no files written).
std::vector<SensorTrial> generate_synthetic_trials(const SynthConfig& cfg);

}  // namespace gaitattn
