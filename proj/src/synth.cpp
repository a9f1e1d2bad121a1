#include "gaitattn/synth.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

namespace fs = std::filesystem;

namespace gaitattn {

std::string to_string(AnomalyKind k) {
  switch (k) {
    case AnomalyKind::kAmplitudeDrop: return "amplitude_drop";
    case AnomalyKind::kVariabilityBoost: return "variability_boost";
    case AnomalyKind::kAxialTremor: return "axial_tremor";
  }
  throw ConfigError("unknown anomaly kind");
}

AnomalyKind anomaly_from_string(const std::string& s) {
  if (s == "amplitude_drop") return AnomalyKind::kAmplitudeDrop;
  if (s == "variability_boost") return AnomalyKind::kVariabilityBoost;
  if (s == "axial_tremor") return AnomalyKind::kAxialTremor;
  throw ConfigError("unknown anomaly kind: '" + s + "'");
}

void SynthConfig::validate() const {
  if (n_controls < 1 || n_patients < 1)
    throw ConfigError("synth: cohort sizes must be >= 1");
  if (trials_per_patient < 1) throw ConfigError("synth: trials_per_patient must be >= 1");
  if (trial_len < kMinTrialLen)
    throw ConfigError("synth: trial_len below the minimum of " +
                      std::to_string(kMinTrialLen));
  if (laterality_fraction_right < 0.0 || laterality_fraction_right > 1.0)
    throw ConfigError("synth: laterality_fraction_right must be in [0, 1]");
  if (noise_std < 0.0) throw ConfigError("synth: noise_std must be >= 0");
  if (amplitude_drop_factor <= 0.0 || amplitude_drop_factor >= 1.0)
    throw ConfigError("synth: amplitude_drop_factor must be in (0, 1)");
  if (variability_boost_factor < 1.0)
    throw ConfigError("synth: variability_boost_factor must be >= 1");
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Relative base amplitude per sensor: feet strongest, lower back moderate,
// head weakest.
constexpr std::array<double, 4> kSensorScale = {0.25, 0.5, 1.0, 1.0};

// Harmonic profile of the gait cycle.
constexpr std::array<double, 4> kHarmonics = {1.0, 0.55, 0.30, 0.15};

struct SubjectParams {
  double base_freq;
  double amp;
  bool anomaly_on_right;  // meaningful for patients with a foot anomaly
  double tremor_freq;     // meaningful for axial tremor
};

SensorTrial make_trial(const SynthConfig& cfg, const std::string& patient_id,
                       const std::string& trial_id, int label,
                       const std::string& cohort, const SubjectParams& sp,
                       Rng& rng) {
  const int t_len = cfg.trial_len;
  const double freq = sp.base_freq * rng.uniform(0.97, 1.03);
  const double phase0 = rng.uniform(0.0, kTwoPi);
  const double am_phase = rng.uniform(0.0, kTwoPi);
  const double tremor_phase = rng.uniform(0.0, kTwoPi);

  const bool is_patient = label == 1;
  const bool foot_anomaly = is_patient && cfg.anomaly != AnomalyKind::kAxialTremor;
  const int anomalous_foot = sp.anomaly_on_right ? kSensorRF : kSensorLF;

  std::vector<double> sig(static_cast<std::size_t>(kNumSensors) * kNumChannels * t_len);
  const std::size_t plane = static_cast<std::size_t>(kNumChannels) * t_len;
  for (int s = 0; s < kNumSensors; ++s) {
    // Feet swing in anti-phase; other sensors sit at fixed offsets.
    const double sensor_phase = (s == kSensorRF) ? std::numbers::pi
                                : (s == kSensorHE) ? 0.9
                                : (s == kSensorLB) ? 0.4
                                                   : 0.0;
    const bool affected_foot = foot_anomaly && s == anomalous_foot;
    double harm_gain = sp.amp * kSensorScale[static_cast<std::size_t>(s)];
    double noise_sd = cfg.noise_std;
    if (affected_foot) {
      if (cfg.anomaly == AnomalyKind::kAmplitudeDrop)
        harm_gain *= cfg.amplitude_drop_factor;
      else
        noise_sd *= cfg.variability_boost_factor;
    }
    for (int c = 0; c < kNumChannels; ++c) {
      const double chan_gain = 0.8 + 0.05 * c;
      double* row = sig.data() + s * plane + static_cast<std::size_t>(c) * t_len;
      for (int t = 0; t < t_len; ++t) {
        const double ts = t / kSampleRateHz;
        double v = 0.0;
        for (std::size_t k = 0; k < kHarmonics.size(); ++k) {
          const double hk = static_cast<double>(k + 1);
          v += kHarmonics[k] *
               std::sin(kTwoPi * hk * freq * ts + phase0 + sensor_phase + 0.7 * c + 0.4 * hk);
        }
        double sample = harm_gain * chan_gain * v;
        if (affected_foot && cfg.anomaly == AnomalyKind::kVariabilityBoost)
          sample *= 1.0 + 0.35 * std::sin(kTwoPi * 0.3 * ts + am_phase);
        if (is_patient && cfg.anomaly == AnomalyKind::kAxialTremor && s == kSensorHE)
          sample += cfg.tremor_amplitude * kSensorScale[kSensorHE] *
                    std::sin(kTwoPi * sp.tremor_freq * ts + tremor_phase);
        row[t] = sample + noise_sd * rng.normal();
      }
    }
  }

  SensorTrial trial;
  trial.trial_id = trial_id;
  trial.patient_id = patient_id;
  trial.label = label;
  trial.cohort = cohort;
  trial.signal = Tensor::from_data({kNumSensors, kNumChannels, t_len}, std::move(sig));
  return trial;
}

std::string zero_pad(int v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

std::vector<SensorTrial> generate_synthetic_trials(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<SensorTrial> trials;
  trials.reserve(static_cast<std::size_t>(cfg.n_controls + cfg.n_patients) *
                 cfg.trials_per_patient);

  auto make_subject = [&](bool patient) {
    SubjectParams sp;
    sp.base_freq = rng.uniform(0.85, 1.15);
    sp.amp = rng.uniform(0.9, 1.1);
    sp.anomaly_on_right = false;
    sp.tremor_freq = 0.0;
    if (patient) {
      sp.anomaly_on_right = rng.uniform() < cfg.laterality_fraction_right;
      if (cfg.anomaly == AnomalyKind::kAxialTremor) sp.tremor_freq = rng.uniform(4.0, 6.0);
    }
    return sp;
  };

  for (int i = 0; i < cfg.n_controls; ++i) {
    const std::string pid = "C" + zero_pad(i, 3);
    const SubjectParams sp = make_subject(false);
    for (int t = 0; t < cfg.trials_per_patient; ++t)
      trials.push_back(make_trial(cfg, pid, pid + "_t" + zero_pad(t, 2), 0, "HS", sp, rng));
  }
  for (int i = 0; i < cfg.n_patients; ++i) {
    const std::string pid = "P" + zero_pad(i, 3);
    const SubjectParams sp = make_subject(true);
    for (int t = 0; t < cfg.trials_per_patient; ++t)
      trials.push_back(make_trial(cfg, pid, pid + "_t" + zero_pad(t, 2), 1, "SYN", sp, rng));
  }
  return trials;
}

Manifest generate_synthetic(const SynthConfig& cfg, const std::string& out_dir) {
  const auto trials = generate_synthetic_trials(cfg);

  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "trials", ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  Manifest m;
  m.task = cfg.task_name;
  m.sensors.assign(kSensorNames.begin(), kSensorNames.end());
  m.channels.assign(kChannelNames.begin(), kChannelNames.end());
  for (const auto& t : trials) {
    const std::string rel = "trials/" + t.trial_id + ".csv";
    save_trial_csv(t, (fs::path(out_dir) / rel).string());
    m.trials.push_back({t.trial_id, t.patient_id, t.label, t.cohort, rel});
  }
  save_manifest(m, (fs::path(out_dir) / "manifest.json").string());
  m.base_dir = out_dir;
  return m;
}

}  // namespace gaitattn
