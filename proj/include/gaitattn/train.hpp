#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaitattn/model.hpp"
#include "gaitattn/split.hpp"
#include "gaitattn/trial.hpp"

namespace gaitattn {

struct TrainConfig {
  double lr = 1e-4;
  int epochs = 50;
  int batch_size = 32;
  int patience = 5;
  // <= 0 means "compute from the training labels" (the normal path).
  double pos_weight = 0.0;
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;
};

struct TrainHistory {
  std::vector<double> train_loss;  // one entry per epoch
  std::vector<double> val_loss;
  int best_epoch = -1;  // 0-based index of the best validation loss
  bool stopped_early = false;
  double pos_weight = 1.0;
  // Both losses use the same weighted BCE; recorded so reports are explicit
  // about what "validation loss" means here.
  std::string val_loss_kind = "weighted_bce";
};

// Adam with bias-corrected moments; one buffer pair per parameter tensor.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long step = 0;
  std::vector<std::vector<double>> m, v;

  static AdamState for_params(const std::vector<Tensor>& params);
};

// (#negatives)/(#positives). Throws DegenerateTaskError when either class
// is missing.
double compute_pos_weight(const std::vector<int>& labels);

// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps), reading each
// parameter's .grad.
void adam_step(std::vector<Tensor>& params, AdamState& state, double lr);

struct TrainResult {
  MultiStreamModel model;  // best-validation snapshot
  TrainHistory history;
};

// The full protocol: seeded shuffling, mini-batches (final partial batch
// kept), mean weighted-BCE per batch, Adam updates, per-epoch validation
// with dropout disabled, early stopping on validation loss with the best
// snapshot restored.
TrainResult train(const MultiStreamModel& init, const std::vector<const SensorTrial*>& train_trials,
                  const std::vector<const SensorTrial*>& val_trials, const TrainConfig& cfg);

// Mean weighted BCE of the model over a set of trials, dropout disabled.
double evaluate_loss(const MultiStreamModel& m, const std::vector<const SensorTrial*>& trials,
                     double pos_weight);

void save_history(const TrainHistory& h, const std::string& path);
TrainHistory load_history(const std::string& path);

// Helpers for wiring splits to loaded trials.
std::vector<const SensorTrial*> select_split(const std::vector<SensorTrial>& all,
                                             const SplitManifest& split,
                                             const std::string& split_name);

}  // namespace gaitattn
