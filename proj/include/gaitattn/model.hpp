#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gaitattn/ops.hpp"
#include "gaitattn/rng.hpp"
#include "gaitattn/tensor.hpp"

namespace gaitattn {

// Canonical sensor order used everywhere in the system.
inline constexpr std::array<const char*, 4> kSensorNames = {"HE", "LB", "LF", "RF"};
inline constexpr int kSensorHE = 0;
inline constexpr int kSensorLB = 1;
inline constexpr int kSensorLF = 2;
inline constexpr int kSensorRF = 3;

struct ModelConfig {
  int n_sensors = 4;
  int n_channels = 9;
  std::vector<int> conv_filters = {32, 64, 128};
  int kernel_size = 15;
  int padding = 7;
  int pool_k = 2;
  int feature_dim = 128;  // must equal conv_filters.back()
  int classifier_hidden = 64;
  double dropout_p = 0.5;
  // Scorer reading of "a single linear layer": false = one feature_dim -> 1
  // map shared across sensors (default); true = one map over the
  // concatenated features, n_sensors*feature_dim -> n_sensors.
  bool concat_scorer = false;
  // Per-channel z-score over time before the first conv layer.
  bool normalize_input = true;

  void validate() const;
  // Shortest trial the conv/pool stack accepts when conv preserves length.
  int min_trial_len() const;
  // Exact number of learnable scalars, as a pure function of the config.
  long long parameter_count() const;
};

// One CNN branch: three conv layers (weights + biases).
struct BranchParams {
  std::vector<Tensor> conv_w;
  std::vector<Tensor> conv_b;
};

// Four independent CNN branches, a sensor scorer and a two-layer classifier.
// Branches are parameter-disjoint; only the scorer and classifier are shared.
struct MultiStreamModel {
  ModelConfig cfg;
  std::vector<BranchParams> branches;
  Tensor attn_w, attn_b;
  Tensor clf_w1, clf_b1, clf_w2, clf_b2;

  // All parameters in a stable order (branch 0..n, attn, classifier).
  std::vector<Tensor> parameters() const;
  std::vector<std::string> parameter_names() const;
  void zero_grad();
  MultiStreamModel clone() const;
};

MultiStreamModel init_model(const ModelConfig& cfg, std::uint64_t seed);

// Forward pass artifacts while the graph is still alive.
struct ForwardResult {
  std::vector<Tensor> features;  // v_i, one per sensor
  Tensor e;                      // raw scores, [n_sensors]
  Tensor alpha;                  // softmax(e)
  Tensor logit;                  // [1]
};

// Plain-value snapshot of one trial's attention and output.
struct AttentionRecord {
  std::string trial_id;
  std::vector<double> e;
  std::vector<double> alpha;
  double logit = 0.0;
};

// Per-channel z-score over the time axis (population variance); channels
// with vanishing spread come out as zeros.
Tensor zscore_channels(const Tensor& x);

// Feature extractor of one branch: conv/relu/pool x3, then mean over time.
Tensor branch_forward(const MultiStreamModel& m, int sensor_index, const Tensor& x);

// Full forward over a [n_sensors, n_channels, T] signal block (flattened
// row-major). Dropout is active only when training.
ForwardResult forward(const MultiStreamModel& m, const Tensor& signal,
                      bool training, Rng& rng);

AttentionRecord make_record(const std::string& trial_id, const ForwardResult& fr);

}  // namespace gaitattn
