#pragma once

#include <array>
#include <string>
#include <vector>

#include "gaitattn/model.hpp"
#include "gaitattn/tensor.hpp"

namespace gaitattn {

inline constexpr std::array<const char*, 9> kChannelNames = {
    "acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y", "gyro_z",
    "facc_x", "facc_y", "facc_z"};
inline constexpr int kNumSensors = 4;
inline constexpr int kNumChannels = 9;
inline constexpr int kMinTrialLen = 8;
inline constexpr double kSampleRateHz = 100.0;

// One walking trial: a [4, 9, T] signal block in the fixed HE/LB/LF/RF
// sensor order and acc/gyro/free-acc channel order.
struct SensorTrial {
  std::string trial_id;
  std::string patient_id;
  int label = 0;  // 0 or 1
  std::string cohort;
  Tensor signal;  // [4, 9, T]
  double sample_rate = kSampleRateHz;

  int length() const { return signal.defined() ? signal.dim(2) : 0; }
  void validate() const;
};

struct ManifestEntry {
  std::string trial_id;
  std::string patient_id;
  int label = 0;
  std::string cohort;
  std::string path;  // relative to the manifest's directory
};

struct Manifest {
  std::string task;
  std::vector<std::string> sensors;   // HE, LB, LF, RF
  std::vector<std::string> channels;  // acc_x ... facc_z
  std::vector<ManifestEntry> trials;
  std::string base_dir;  // directory the manifest was loaded from (not serialized)

  void validate() const;  // unique trial ids, layout descriptor sanity
};

// Trial CSV: header `t,HE_acc_x,...,RF_facc_z`, then one row per sample with
// the index followed by 36 signal values at 17 significant digits.
void save_trial_csv(const SensorTrial& trial, const std::string& path);
SensorTrial load_trial(const std::string& path);

void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

// Loads every trial referenced by a manifest (paths resolved against its
// base_dir), carrying over labels and ids.
std::vector<SensorTrial> load_all_trials(const Manifest& m);

}  // namespace gaitattn
