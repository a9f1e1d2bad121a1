#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gaitattn/trial.hpp"

namespace gaitattn {

// Patient-level train/val/test partition. Patient sets are pairwise
// disjoint by construction, so no individual contributes trials to more
// than one split.
struct SplitManifest {
  std::uint64_t seed = 0;
  std::array<double, 3> ratios = {0.70, 0.15, 0.15};
  std::vector<std::string> train, val, test;
  std::vector<std::string> warnings;  // stratification shortfalls, not errors

  const std::vector<std::string>& split(int i) const;
  bool contains(const std::string& split_name, const std::string& patient_id) const;
  // Manifest entries belonging to one split ("train", "val" or "test").
  std::vector<ManifestEntry> trials_of(const Manifest& m, const std::string& split_name) const;
};

// Shuffles patients per class label (stratified) and partitions by
// cumulative ratio with largest-remainder rounding; remainder ties go to
// the split furthest below its overall quota, then to the earlier split.
// Set stratified=false for a plain patient-level split.
SplitManifest split_patients(const Manifest& manifest,
                             const std::array<double, 3>& ratios,
                             std::uint64_t seed, bool stratified = true);

void save_split(const SplitManifest& s, const std::string& path);
SplitManifest load_split(const std::string& path);

}  // namespace gaitattn
