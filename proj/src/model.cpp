#include "gaitattn/model.hpp"

#include <cmath>
#include <cstring>

namespace gaitattn {

void ModelConfig::validate() const {
  if (n_sensors < 1) throw ConfigError("model: n_sensors must be >= 1");
  if (n_channels < 1) throw ConfigError("model: n_channels must be >= 1");
  if (conv_filters.empty()) throw ConfigError("model: conv_filters empty");
  for (int f : conv_filters)
    if (f < 1) throw ConfigError("model: conv filter counts must be positive");
  if (feature_dim != conv_filters.back())
    throw ConfigError("model: feature_dim must equal the last conv filter count");
  if (kernel_size < 1 || padding < 0) throw ConfigError("model: bad kernel/padding");
  if (pool_k < 1) throw ConfigError("model: pool_k must be >= 1");
  if (classifier_hidden < 1) throw ConfigError("model: classifier_hidden must be >= 1");
  if (dropout_p < 0.0 || dropout_p >= 1.0)
    throw ConfigError("model: dropout_p must be in [0, 1)");
}

int ModelConfig::min_trial_len() const {
  int t = 1;
  for (std::size_t i = 0; i < conv_filters.size(); ++i) t *= pool_k;
  return t;
}

long long ModelConfig::parameter_count() const {
  long long per_branch = 0;
  int c_in = n_channels;
  for (int f : conv_filters) {
    per_branch += static_cast<long long>(f) * c_in * kernel_size + f;
    c_in = f;
  }
  long long attn = concat_scorer
                       ? static_cast<long long>(n_sensors) * n_sensors * feature_dim +
                             n_sensors
                       : feature_dim + 1;
  long long clf = static_cast<long long>(classifier_hidden) * feature_dim +
                  classifier_hidden + classifier_hidden + 1;
  return per_branch * n_sensors + attn + clf;
}

namespace {

// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights; biases stay zero.
Tensor init_weight(std::vector<int> shape, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  std::vector<double> data(n);
  for (auto& v : data) v = rng.uniform(-bound, bound);
  return Tensor::from_data(std::move(shape), std::move(data), true);
}

}  // namespace

MultiStreamModel init_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  MultiStreamModel m;
  m.cfg = cfg;
  for (int s = 0; s < cfg.n_sensors; ++s) {
    BranchParams br;
    int c_in = cfg.n_channels;
    for (int f : cfg.conv_filters) {
      br.conv_w.push_back(init_weight({f, c_in, cfg.kernel_size}, c_in * cfg.kernel_size, rng));
      br.conv_b.push_back(Tensor::zeros({f}, true));
      c_in = f;
    }
    m.branches.push_back(std::move(br));
  }
  if (cfg.concat_scorer) {
    const int in = cfg.n_sensors * cfg.feature_dim;
    m.attn_w = init_weight({cfg.n_sensors, in}, in, rng);
    m.attn_b = Tensor::zeros({cfg.n_sensors}, true);
  } else {
    m.attn_w = init_weight({1, cfg.feature_dim}, cfg.feature_dim, rng);
    m.attn_b = Tensor::zeros({1}, true);
  }
  m.clf_w1 = init_weight({cfg.classifier_hidden, cfg.feature_dim}, cfg.feature_dim, rng);
  m.clf_b1 = Tensor::zeros({cfg.classifier_hidden}, true);
  m.clf_w2 = init_weight({1, cfg.classifier_hidden}, cfg.classifier_hidden, rng);
  m.clf_b2 = Tensor::zeros({1}, true);
  return m;
}

std::vector<Tensor> MultiStreamModel::parameters() const {
  std::vector<Tensor> ps;
  for (const auto& br : branches)
    for (std::size_t j = 0; j < br.conv_w.size(); ++j) {
      ps.push_back(br.conv_w[j]);
      ps.push_back(br.conv_b[j]);
    }
  ps.push_back(attn_w);
  ps.push_back(attn_b);
  ps.push_back(clf_w1);
  ps.push_back(clf_b1);
  ps.push_back(clf_w2);
  ps.push_back(clf_b2);
  return ps;
}

std::vector<std::string> MultiStreamModel::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t s = 0; s < branches.size(); ++s)
    for (std::size_t j = 0; j < branches[s].conv_w.size(); ++j) {
      names.push_back("branch" + std::to_string(s) + ".conv" + std::to_string(j) + ".w");
      names.push_back("branch" + std::to_string(s) + ".conv" + std::to_string(j) + ".b");
    }
  names.push_back("attn.w");
  names.push_back("attn.b");
  names.push_back("clf.0.w");
  names.push_back("clf.0.b");
  names.push_back("clf.1.w");
  names.push_back("clf.1.b");
  return names;
}

void MultiStreamModel::zero_grad() {
  for (auto& p : parameters()) p.zero_grad();
}

MultiStreamModel MultiStreamModel::clone() const {
  MultiStreamModel m;
  m.cfg = cfg;
  for (const auto& br : branches) {
    BranchParams b2;
    for (const auto& w : br.conv_w) b2.conv_w.push_back(w.clone());
    for (const auto& b : br.conv_b) b2.conv_b.push_back(b.clone());
    m.branches.push_back(std::move(b2));
  }
  m.attn_w = attn_w.clone();
  m.attn_b = attn_b.clone();
  m.clf_w1 = clf_w1.clone();
  m.clf_b1 = clf_b1.clone();
  m.clf_w2 = clf_w2.clone();
  m.clf_b2 = clf_b2.clone();
  return m;
}

Tensor zscore_channels(const Tensor& x) {
  if (x.ndim() != 2) throw ShapeError("zscore_channels expects [C, T]");
  const int c = x.dim(0), t = x.dim(1);
  std::vector<double> out(static_cast<std::size_t>(c) * t);
  const double* src = x.data();
  for (int ci = 0; ci < c; ++ci) {
    const double* row = src + static_cast<std::size_t>(ci) * t;
    double mean = 0.0;
    for (int i = 0; i < t; ++i) mean += row[i];
    mean /= t;
    double var = 0.0;
    for (int i = 0; i < t; ++i) {
      const double d = row[i] - mean;
      var += d * d;
    }
    var /= t;
    const double sd = std::sqrt(var);
    double* dst = out.data() + static_cast<std::size_t>(ci) * t;
    if (sd < 1e-12) {
      std::memset(dst, 0, sizeof(double) * static_cast<std::size_t>(t));
    } else {
      const double inv = 1.0 / sd;
      for (int i = 0; i < t; ++i) dst[i] = (row[i] - mean) * inv;
    }
  }
  return Tensor::from_data({c, t}, std::move(out));
}

Tensor branch_forward(const MultiStreamModel& m, int sensor_index, const Tensor& x) {
  if (sensor_index < 0 || sensor_index >= m.cfg.n_sensors)
    throw ShapeError("branch_forward: sensor index out of range");
  if (x.ndim() != 2 || x.dim(0) != m.cfg.n_channels)
    throw ShapeError("branch_forward: expected [" + std::to_string(m.cfg.n_channels) +
                     ", T] input");
  if (x.dim(1) < m.cfg.min_trial_len())
    throw InputTooShortError("branch_forward: trial length " + std::to_string(x.dim(1)) +
                             " below minimum " + std::to_string(m.cfg.min_trial_len()));
  const auto& br = m.branches[static_cast<std::size_t>(sensor_index)];
  Tensor h = x;
  for (std::size_t j = 0; j < br.conv_w.size(); ++j) {
    h = conv1d(h, br.conv_w[j], br.conv_b[j], m.cfg.padding);
    h = relu(h);
    h = maxpool1d(h, m.cfg.pool_k);
  }
  return adaptive_avg_pool_to_1(h);
}

ForwardResult forward(const MultiStreamModel& m, const Tensor& signal,
                      bool training, Rng& rng) {
  const auto& cfg = m.cfg;
  if (signal.ndim() != 3 || signal.dim(0) != cfg.n_sensors ||
      signal.dim(1) != cfg.n_channels)
    throw ShapeError("forward: expected [" + std::to_string(cfg.n_sensors) + ", " +
                     std::to_string(cfg.n_channels) + ", T] signal block");
  const int t = signal.dim(2);
  const std::size_t plane = static_cast<std::size_t>(cfg.n_channels) * t;

  ForwardResult fr;
  for (int s = 0; s < cfg.n_sensors; ++s) {
    std::vector<double> buf(signal.data() + s * plane, signal.data() + (s + 1) * plane);
    Tensor xs = Tensor::from_data({cfg.n_channels, t}, std::move(buf));
    if (cfg.normalize_input) xs = zscore_channels(xs);
    fr.features.push_back(branch_forward(m, s, xs));
  }

  if (cfg.concat_scorer) {
    fr.e = linear(concat(fr.features), m.attn_w, m.attn_b);
  } else {
    std::vector<Tensor> scores;
    scores.reserve(fr.features.size());
    for (const auto& v : fr.features) scores.push_back(linear(v, m.attn_w, m.attn_b));
    fr.e = concat(scores);
  }
  fr.alpha = softmax(fr.e);

  Tensor context = weighted_sum(fr.alpha, fr.features);
  Tensor h = relu(linear(context, m.clf_w1, m.clf_b1));
  h = dropout(h, cfg.dropout_p, training, rng);
  fr.logit = linear(h, m.clf_w2, m.clf_b2);
  return fr;
}

AttentionRecord make_record(const std::string& trial_id, const ForwardResult& fr) {
  AttentionRecord rec;
  rec.trial_id = trial_id;
  rec.e = fr.e.data_vec();
  rec.alpha = fr.alpha.data_vec();
  rec.logit = fr.logit.item();
  return rec;
}

}  // namespace gaitattn
