#include "gaitattn/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace gaitattn {

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw ConfigError("train: lr must be >= 0");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (patience < 1) throw ConfigError("train: patience must be >= 1");
}

double compute_pos_weight(const std::vector<int>& labels) {
  long long pos = 0, neg = 0;
  for (int l : labels) (l == 1 ? pos : neg) += 1;
  if (pos == 0 || neg == 0)
    throw DegenerateTaskError("pos_weight undefined: " + std::to_string(pos) +
                              " positive / " + std::to_string(neg) +
                              " negative labels");
  return static_cast<double>(neg) / static_cast<double>(pos);
}

AdamState AdamState::for_params(const std::vector<Tensor>& params) {
  AdamState st;
  st.m.reserve(params.size());
  st.v.reserve(params.size());
  for (const auto& p : params) {
    st.m.emplace_back(p.data_vec().size(), 0.0);
    st.v.emplace_back(p.data_vec().size(), 0.0);
  }
  return st;
}

void adam_step(std::vector<Tensor>& params, AdamState& state, double lr) {
  if (state.m.size() != params.size())
    throw ShapeError("adam_step: state does not match parameter list");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& theta = params[i].data_vec();
    const auto& g = params[i].grad_vec();
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (m.size() != theta.size())
      throw ShapeError("adam_step: moment buffer shape mismatch");
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      theta[j] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

double evaluate_loss(const MultiStreamModel& m, const std::vector<const SensorTrial*>& trials,
                     double pos_weight) {
  if (trials.empty()) throw ConfigError("evaluate_loss: empty trial set");
  Rng unused(0);  // dropout is inactive in eval mode
  double total = 0.0;
  for (const SensorTrial* t : trials) {
    ForwardResult fr = forward(m, t->signal, /*training=*/false, unused);
    total += bce_with_logits(fr.logit, t->label, pos_weight).item();
  }
  return total / static_cast<double>(trials.size());
}

TrainResult train(const MultiStreamModel& init,
                  const std::vector<const SensorTrial*>& train_trials,
                  const std::vector<const SensorTrial*>& val_trials,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_trials.empty()) throw ConfigError("train: empty training split");
  if (val_trials.empty()) throw ConfigError("train: empty validation split");

  TrainHistory hist;
  if (cfg.pos_weight > 0.0) {
    hist.pos_weight = cfg.pos_weight;
  } else {
    // From the training labels only; validation/test labels stay unseen.
    std::vector<int> labels;
    labels.reserve(train_trials.size());
    for (const SensorTrial* t : train_trials) labels.push_back(t->label);
    hist.pos_weight = compute_pos_weight(labels);
  }

  MultiStreamModel model = init.clone();
  auto params = model.parameters();
  AdamState adam = AdamState::for_params(params);
  Rng rng(cfg.seed);  // drives epoch shuffles and dropout masks

  MultiStreamModel best = model.clone();
  double best_val = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train_trials.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) rng.shuffle(order);

    double loss_sum = 0.0;  // summed over trials, for the epoch mean
    std::size_t pos = 0;
    int batch_index = 0;
    while (pos < order.size()) {
      const std::size_t batch_end =
          std::min(order.size(), pos + static_cast<std::size_t>(cfg.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(batch_end - pos);
      model.zero_grad();
      double batch_sum = 0.0;
      for (; pos < batch_end; ++pos) {
        const SensorTrial* t = train_trials[order[pos]];
        ForwardResult fr = forward(model, t->signal, /*training=*/true, rng);
        Tensor loss = bce_with_logits(fr.logit, t->label, hist.pos_weight);
        batch_sum += loss.item();
        // Backward on loss/batch_size so the accumulated grads equal the
        // gradient of the batch mean.
        scale(loss, inv_batch).backward();
      }
      if (!std::isfinite(batch_sum))
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch + 1) +
                           ", batch " + std::to_string(batch_index + 1));
      loss_sum += batch_sum;
      adam_step(params, adam, cfg.lr);
      ++batch_index;
    }
    hist.train_loss.push_back(loss_sum / static_cast<double>(order.size()));

    const double val_loss = evaluate_loss(model, val_trials, hist.pos_weight);
    if (!std::isfinite(val_loss))
      throw NumericError("train: non-finite validation loss after epoch " +
                         std::to_string(epoch + 1));
    hist.val_loss.push_back(val_loss);

    if (val_loss < best_val) {
      best_val = val_loss;
      hist.best_epoch = epoch;
      best = model.clone();
    } else if (epoch - hist.best_epoch >= cfg.patience) {
      hist.stopped_early = true;
      break;
    }
  }
  return {std::move(best), std::move(hist)};
}

void save_history(const TrainHistory& h, const std::string& path) {
  nlohmann::json j;
  j["train_loss"] = h.train_loss;
  j["val_loss"] = h.val_loss;
  j["best_epoch"] = h.best_epoch;
  j["stopped_early"] = h.stopped_early;
  j["pos_weight"] = h.pos_weight;
  j["val_loss_kind"] = h.val_loss_kind;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open history for writing: " + path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failure on history: " + path);
}

TrainHistory load_history(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open history: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ParseError("history " + path + ": " + e.what());
  }
  TrainHistory h;
  h.train_loss = j.at("train_loss").get<std::vector<double>>();
  h.val_loss = j.at("val_loss").get<std::vector<double>>();
  h.best_epoch = j.at("best_epoch").get<int>();
  h.stopped_early = j.at("stopped_early").get<bool>();
  h.pos_weight = j.at("pos_weight").get<double>();
  h.val_loss_kind = j.at("val_loss_kind").get<std::string>();
  return h;
}

std::vector<const SensorTrial*> select_split(const std::vector<SensorTrial>& all,
                                             const SplitManifest& split,
                                             const std::string& split_name) {
  std::vector<const SensorTrial*> out;
  for (const auto& t : all)
    if (split.contains(split_name, t.patient_id)) out.push_back(&t);
  return out;
}

}  // namespace gaitattn
