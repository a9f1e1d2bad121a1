#include "gaitattn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <string>

namespace gaitattn {

using detail::Node;
using detail::node_of;
using detail::wrap;

namespace {

std::shared_ptr<Node> make_out(std::vector<int> shape,
                               std::vector<std::shared_ptr<Node>> parents) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  std::size_t count = 1;
  for (int d : n->shape) count *= static_cast<std::size_t>(d);
  n->data.resize(count);
  for (const auto& p : parents)
    if (p->requires_grad) n->requires_grad = true;
  n->parents = std::move(parents);
  return n;
}

void require_dims(const Tensor& t, int ndim, const char* what) {
  if (t.ndim() != ndim)
    throw ShapeError(std::string(what) + ": expected a " + std::to_string(ndim) +
                     "-d tensor, got " + std::to_string(t.ndim()) + "-d");
}

// softplus(t) = log(1 + exp(t)) without overflow.
double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int padding) {
  require_dims(x, 2, "conv1d input");
  require_dims(w, 3, "conv1d weight");
  require_dims(b, 1, "conv1d bias");
  if (padding < 0) throw ShapeError("conv1d: padding must be >= 0");
  const int c_in = x.dim(0), t_in = x.dim(1);
  const int c_out = w.dim(0), k = w.dim(2);
  if (w.dim(1) != c_in)
    throw ShapeError("conv1d: weight expects " + std::to_string(w.dim(1)) +
                     " input channels, input has " + std::to_string(c_in));
  if (b.dim(0) != c_out) throw ShapeError("conv1d: bias/filter count mismatch");
  const int t_pad = t_in + 2 * padding;
  const int t_out = t_pad - k + 1;
  if (t_out <= 0)
    throw InputTooShortError("conv1d: input length " + std::to_string(t_in) +
                             " with padding " + std::to_string(padding) +
                             " is shorter than the kernel (" + std::to_string(k) + ")");

  auto xn = node_of(x), wn = node_of(w), bn = node_of(b);
  // Padded copy of the input, kept for the backward pass.
  auto xpad = std::make_shared<std::vector<double>>(
      static_cast<std::size_t>(c_in) * t_pad, 0.0);
  for (int ci = 0; ci < c_in; ++ci)
    std::memcpy(xpad->data() + static_cast<std::size_t>(ci) * t_pad + padding,
                xn->data.data() + static_cast<std::size_t>(ci) * t_in,
                sizeof(double) * static_cast<std::size_t>(t_in));

  auto out = make_out({c_out, t_out}, {xn, wn, bn});
  for (int co = 0; co < c_out; ++co) {
    double* o = out->data.data() + static_cast<std::size_t>(co) * t_out;
    std::fill(o, o + t_out, bn->data[static_cast<std::size_t>(co)]);
    for (int ci = 0; ci < c_in; ++ci) {
      const double* xp = xpad->data() + static_cast<std::size_t>(ci) * t_pad;
      const double* wrow =
          wn->data.data() + (static_cast<std::size_t>(co) * c_in + ci) * k;
      // Five taps per sweep keeps the accumulation in registers instead of
      // re-storing o once per tap. Left-to-right addition preserves the
      // ascending-k summation order.
      int kk = 0;
      for (; kk + 5 <= k; kk += 5) {
        const double w0 = wrow[kk], w1 = wrow[kk + 1], w2 = wrow[kk + 2],
                     w3 = wrow[kk + 3], w4 = wrow[kk + 4];
        const double* xs = xp + kk;
        for (int t = 0; t < t_out; ++t)
          o[t] += w0 * xs[t] + w1 * xs[t + 1] + w2 * xs[t + 2] +
                  w3 * xs[t + 3] + w4 * xs[t + 4];
      }
      for (; kk < k; ++kk) {
        const double wv = wrow[kk];
        const double* xs = xp + kk;
        for (int t = 0; t < t_out; ++t) o[t] += wv * xs[t];
      }
    }
  }

  if (out->requires_grad) {
    out->backward_fn = [xn, wn, bn, xpad, c_in, c_out, k, t_in, t_out, t_pad,
                        padding](Node& self) {
      const double* g = self.grad.data();
      if (bn->requires_grad) {
        for (int co = 0; co < c_out; ++co) {
          const double* gr = g + static_cast<std::size_t>(co) * t_out;
          double acc = 0.0;
          for (int t = 0; t < t_out; ++t) acc += gr[t];
          bn->grad[static_cast<std::size_t>(co)] += acc;
        }
      }
      if (wn->requires_grad) {
        for (int co = 0; co < c_out; ++co) {
          const double* gr = g + static_cast<std::size_t>(co) * t_out;
          for (int ci = 0; ci < c_in; ++ci) {
            const double* xp = xpad->data() + static_cast<std::size_t>(ci) * t_pad;
            double* gw =
                wn->grad.data() + (static_cast<std::size_t>(co) * c_in + ci) * k;
            for (int kk = 0; kk < k; ++kk) {
              const double* xs = xp + kk;
              // Eight independent lane accumulators; the lanes map onto
              // vector registers without reassociating any single sum.
              double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
              int t = 0;
              for (; t + 8 <= t_out; t += 8)
                for (int l = 0; l < 8; ++l) acc[l] += gr[t + l] * xs[t + l];
              double total = ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
                             ((acc[4] + acc[5]) + (acc[6] + acc[7]));
              for (; t < t_out; ++t) total += gr[t] * xs[t];
              gw[kk] += total;
            }
          }
        }
      }
      if (xn->requires_grad) {
        // grad wrt the padded input is a correlation of the (zero-extended)
        // output gradient with the reversed kernel; single destination row
        // per (ci, co) pass.
        std::vector<double> gxpad(static_cast<std::size_t>(c_in) * t_pad, 0.0);
        std::vector<double> grext(static_cast<std::size_t>(t_out) + 2 * (k - 1), 0.0);
        for (int co = 0; co < c_out; ++co) {
          const double* gr = g + static_cast<std::size_t>(co) * t_out;
          std::memcpy(grext.data() + (k - 1), gr,
                      sizeof(double) * static_cast<std::size_t>(t_out));
          for (int ci = 0; ci < c_in; ++ci) {
            double* gx = gxpad.data() + static_cast<std::size_t>(ci) * t_pad;
            const double* wrow =
                wn->data.data() + (static_cast<std::size_t>(co) * c_in + ci) * k;
            int kk = 0;
            for (; kk + 5 <= k; kk += 5) {
              const double w0 = wrow[kk], w1 = wrow[kk + 1], w2 = wrow[kk + 2],
                           w3 = wrow[kk + 3], w4 = wrow[kk + 4];
              const double* gs = grext.data() + (k - 1) - kk;
              for (int i = 0; i < t_pad; ++i)
                gx[i] += w0 * gs[i] + w1 * gs[i - 1] + w2 * gs[i - 2] +
                         w3 * gs[i - 3] + w4 * gs[i - 4];
            }
            for (; kk < k; ++kk) {
              const double wv = wrow[kk];
              const double* gs = grext.data() + (k - 1) - kk;
              for (int i = 0; i < t_pad; ++i) gx[i] += wv * gs[i];
            }
          }
        }
        for (int ci = 0; ci < c_in; ++ci) {
          const double* src = gxpad.data() + static_cast<std::size_t>(ci) * t_pad + padding;
          double* dst = xn->grad.data() + static_cast<std::size_t>(ci) * t_in;
          for (int t = 0; t < t_in; ++t) dst[t] += src[t];
        }
      }
    };
  }
  return wrap(std::move(out));
}

Tensor relu(const Tensor& x) {
  auto xn = node_of(x);
  auto out = make_out(xn->shape, {xn});
  const std::size_t n = xn->data.size();
  for (std::size_t i = 0; i < n; ++i)
    out->data[i] = xn->data[i] > 0.0 ? xn->data[i] : 0.0;
  if (out->requires_grad) {
    out->backward_fn = [xn](Node& self) {
      if (!xn->requires_grad) return;
      const std::size_t n = self.data.size();
      for (std::size_t i = 0; i < n; ++i)
        if (xn->data[i] > 0.0) xn->grad[i] += self.grad[i];
    };
  }
  return wrap(std::move(out));
}

Tensor maxpool1d(const Tensor& x, int k) {
  require_dims(x, 2, "maxpool1d input");
  if (k < 1) throw ShapeError("maxpool1d: kernel must be >= 1");
  const int c = x.dim(0), t_in = x.dim(1);
  const int t_out = t_in / k;
  if (t_out == 0)
    throw InputTooShortError("maxpool1d: input length " + std::to_string(t_in) +
                             " is shorter than the pooling window (" +
                             std::to_string(k) + ")");
  auto xn = node_of(x);
  auto out = make_out({c, t_out}, {xn});
  // First-occurrence argmax per window, kept for gradient routing.
  auto argmax = std::make_shared<std::vector<int>>(
      static_cast<std::size_t>(c) * t_out);
  for (int ci = 0; ci < c; ++ci) {
    const double* row = xn->data.data() + static_cast<std::size_t>(ci) * t_in;
    for (int j = 0; j < t_out; ++j) {
      int best = j * k;
      double bv = row[best];
      for (int d = 1; d < k; ++d) {
        if (row[j * k + d] > bv) {
          best = j * k + d;
          bv = row[best];
        }
      }
      out->data[static_cast<std::size_t>(ci) * t_out + j] = bv;
      (*argmax)[static_cast<std::size_t>(ci) * t_out + j] = best;
    }
  }
  if (out->requires_grad) {
    out->backward_fn = [xn, argmax, c, t_in, t_out](Node& self) {
      if (!xn->requires_grad) return;
      for (int ci = 0; ci < c; ++ci)
        for (int j = 0; j < t_out; ++j) {
          const std::size_t oi = static_cast<std::size_t>(ci) * t_out + j;
          xn->grad[static_cast<std::size_t>(ci) * t_in + (*argmax)[oi]] += self.grad[oi];
        }
    };
  }
  return wrap(std::move(out));
}

Tensor adaptive_avg_pool_to_1(const Tensor& x) {
  require_dims(x, 2, "adaptive_avg_pool input");
  const int c = x.dim(0), t = x.dim(1);
  auto xn = node_of(x);
  auto out = make_out({c}, {xn});
  const double inv = 1.0 / t;
  for (int ci = 0; ci < c; ++ci) {
    const double* row = xn->data.data() + static_cast<std::size_t>(ci) * t;
    double acc = 0.0;
    for (int i = 0; i < t; ++i) acc += row[i];
    out->data[static_cast<std::size_t>(ci)] = acc * inv;
  }
  if (out->requires_grad) {
    out->backward_fn = [xn, c, t, inv](Node& self) {
      if (!xn->requires_grad) return;
      for (int ci = 0; ci < c; ++ci) {
        const double gv = self.grad[static_cast<std::size_t>(ci)] * inv;
        double* gx = xn->grad.data() + static_cast<std::size_t>(ci) * t;
        for (int i = 0; i < t; ++i) gx[i] += gv;
      }
    };
  }
  return wrap(std::move(out));
}

Tensor linear(const Tensor& x, const Tensor& W, const Tensor& b) {
  require_dims(x, 1, "linear input");
  require_dims(W, 2, "linear weight");
  require_dims(b, 1, "linear bias");
  const int n = x.dim(0), m = W.dim(0);
  if (W.dim(1) != n)
    throw ShapeError("linear: weight expects input of length " +
                     std::to_string(W.dim(1)) + ", got " + std::to_string(n));
  if (b.dim(0) != m) throw ShapeError("linear: bias/output mismatch");
  auto xn = node_of(x), wn = node_of(W), bn = node_of(b);
  auto out = make_out({m}, {xn, wn, bn});
  for (int i = 0; i < m; ++i) {
    const double* wrow = wn->data.data() + static_cast<std::size_t>(i) * n;
    double acc = bn->data[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) acc += wrow[j] * xn->data[static_cast<std::size_t>(j)];
    out->data[static_cast<std::size_t>(i)] = acc;
  }
  if (out->requires_grad) {
    out->backward_fn = [xn, wn, bn, n, m](Node& self) {
      const double* g = self.grad.data();
      if (bn->requires_grad)
        for (int i = 0; i < m; ++i) bn->grad[static_cast<std::size_t>(i)] += g[i];
      if (wn->requires_grad)
        for (int i = 0; i < m; ++i) {
          double* gw = wn->grad.data() + static_cast<std::size_t>(i) * n;
          const double gv = g[i];
          for (int j = 0; j < n; ++j) gw[j] += gv * xn->data[static_cast<std::size_t>(j)];
        }
      if (xn->requires_grad)
        for (int i = 0; i < m; ++i) {
          const double* wrow = wn->data.data() + static_cast<std::size_t>(i) * n;
          const double gv = g[i];
          for (int j = 0; j < n; ++j) xn->grad[static_cast<std::size_t>(j)] += gv * wrow[j];
        }
    };
  }
  return wrap(std::move(out));
}

Tensor softmax(const Tensor& e) {
  require_dims(e, 1, "softmax input");
  auto en = node_of(e);
  auto out = make_out(en->shape, {en});
  const std::size_t s = en->data.size();
  double mx = en->data[0];
  for (std::size_t i = 1; i < s; ++i) mx = std::max(mx, en->data[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    out->data[i] = std::exp(en->data[i] - mx);
    total += out->data[i];
  }
  const double inv = 1.0 / total;
  for (std::size_t i = 0; i < s; ++i) out->data[i] *= inv;
  if (out->requires_grad) {
    out->backward_fn = [en](Node& self) {
      if (!en->requires_grad) return;
      const std::size_t s = self.data.size();
      double dot = 0.0;
      for (std::size_t i = 0; i < s; ++i) dot += self.grad[i] * self.data[i];
      for (std::size_t i = 0; i < s; ++i)
        en->grad[i] += self.data[i] * (self.grad[i] - dot);
    };
  }
  return wrap(std::move(out));
}

Tensor dropout(const Tensor& x, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0)
    throw ConfigError("dropout: p must be in [0, 1), got " + std::to_string(p));
  if (!training || p == 0.0) return x;  // eval mode is a pure identity
  auto xn = node_of(x);
  auto out = make_out(xn->shape, {xn});
  const double keep_scale = 1.0 / (1.0 - p);
  auto mask = std::make_shared<std::vector<double>>(xn->data.size());
  for (std::size_t i = 0; i < xn->data.size(); ++i) {
    (*mask)[i] = rng.uniform() < p ? 0.0 : keep_scale;
    out->data[i] = xn->data[i] * (*mask)[i];
  }
  if (out->requires_grad) {
    out->backward_fn = [xn, mask](Node& self) {
      if (!xn->requires_grad) return;
      for (std::size_t i = 0; i < self.data.size(); ++i)
        xn->grad[i] += self.grad[i] * (*mask)[i];
    };
  }
  return wrap(std::move(out));
}

Tensor bce_with_logits(const Tensor& logit, double label, double pos_weight) {
  if (logit.numel() != 1)
    throw ShapeError("bce_with_logits expects a single-logit tensor");
  if (label != 0.0 && label != 1.0)
    throw ConfigError("bce_with_logits: label must be 0 or 1");
  if (!(pos_weight > 0.0))
    throw ConfigError("bce_with_logits: pos_weight must be positive");
  auto zn = node_of(logit);
  auto out = make_out({1}, {zn});
  const double z = zn->data[0];
  out->data[0] = pos_weight * label * softplus(-z) + (1.0 - label) * softplus(z);
  if (out->requires_grad) {
    out->backward_fn = [zn, label, pos_weight](Node& self) {
      if (!zn->requires_grad) return;
      const double z = zn->data[0];
      const double s = sigmoid(z);
      zn->grad[0] +=
          self.grad[0] * (pos_weight * label * (s - 1.0) + (1.0 - label) * s);
    };
  }
  return wrap(std::move(out));
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat: nothing to concatenate");
  std::vector<std::shared_ptr<Node>> ps;
  int total = 0;
  for (const auto& t : parts) {
    require_dims(t, 1, "concat part");
    ps.push_back(node_of(t));
    total += t.dim(0);
  }
  auto out = make_out({total}, ps);
  std::size_t off = 0;
  for (const auto& p : ps) {
    std::memcpy(out->data.data() + off, p->data.data(),
                sizeof(double) * p->data.size());
    off += p->data.size();
  }
  if (out->requires_grad) {
    out->backward_fn = [ps](Node& self) {
      std::size_t off = 0;
      for (const auto& p : ps) {
        if (p->requires_grad)
          for (std::size_t i = 0; i < p->data.size(); ++i)
            p->grad[i] += self.grad[off + i];
        off += p->data.size();
      }
    };
  }
  return wrap(std::move(out));
}

Tensor weighted_sum(const Tensor& weights, const std::vector<Tensor>& items) {
  require_dims(weights, 1, "weighted_sum weights");
  if (items.empty()) throw ShapeError("weighted_sum: no items");
  if (weights.dim(0) != static_cast<int>(items.size()))
    throw ShapeError("weighted_sum: weight count does not match item count");
  std::vector<std::shared_ptr<Node>> ps;
  auto wn = node_of(weights);
  ps.push_back(wn);
  for (const auto& t : items) {
    if (t.shape() != items.front().shape())
      throw ShapeError("weighted_sum: items must share a shape");
    ps.push_back(node_of(t));
  }
  auto out = make_out(items.front().shape(), ps);
  const std::size_t d = out->data.size();
  std::fill(out->data.begin(), out->data.end(), 0.0);
  for (std::size_t s = 0; s < items.size(); ++s) {
    const double a = wn->data[s];
    const double* v = ps[s + 1]->data.data();
    for (std::size_t i = 0; i < d; ++i) out->data[i] += a * v[i];
  }
  if (out->requires_grad) {
    out->backward_fn = [ps, wn](Node& self) {
      const std::size_t d = self.data.size();
      for (std::size_t s = 0; s + 1 < ps.size(); ++s) {
        const auto& item = ps[s + 1];
        if (wn->requires_grad) {
          double acc = 0.0;
          for (std::size_t i = 0; i < d; ++i) acc += self.grad[i] * item->data[i];
          wn->grad[s] += acc;
        }
        if (item->requires_grad) {
          const double a = wn->data[s];
          for (std::size_t i = 0; i < d; ++i) item->grad[i] += a * self.grad[i];
        }
      }
    };
  }
  return wrap(std::move(out));
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError("add: shape mismatch");
  auto an = node_of(a), bn = node_of(b);
  auto out = make_out(an->shape, {an, bn});
  for (std::size_t i = 0; i < an->data.size(); ++i)
    out->data[i] = an->data[i] + bn->data[i];
  if (out->requires_grad) {
    out->backward_fn = [an, bn](Node& self) {
      for (std::size_t i = 0; i < self.data.size(); ++i) {
        if (an->requires_grad) an->grad[i] += self.grad[i];
        if (bn->requires_grad) bn->grad[i] += self.grad[i];
      }
    };
  }
  return wrap(std::move(out));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError("mul: shape mismatch");
  auto an = node_of(a), bn = node_of(b);
  auto out = make_out(an->shape, {an, bn});
  for (std::size_t i = 0; i < an->data.size(); ++i)
    out->data[i] = an->data[i] * bn->data[i];
  if (out->requires_grad) {
    out->backward_fn = [an, bn](Node& self) {
      for (std::size_t i = 0; i < self.data.size(); ++i) {
        if (an->requires_grad) an->grad[i] += self.grad[i] * bn->data[i];
        if (bn->requires_grad) bn->grad[i] += self.grad[i] * an->data[i];
      }
    };
  }
  return wrap(std::move(out));
}

Tensor scale(const Tensor& a, double c) {
  auto an = node_of(a);
  auto out = make_out(an->shape, {an});
  for (std::size_t i = 0; i < an->data.size(); ++i) out->data[i] = an->data[i] * c;
  if (out->requires_grad) {
    out->backward_fn = [an, c](Node& self) {
      if (!an->requires_grad) return;
      for (std::size_t i = 0; i < self.data.size(); ++i)
        an->grad[i] += self.grad[i] * c;
    };
  }
  return wrap(std::move(out));
}

Tensor sum(const Tensor& x) {
  auto xn = node_of(x);
  auto out = make_out({1}, {xn});
  double acc = 0.0;
  for (double v : xn->data) acc += v;
  out->data[0] = acc;
  if (out->requires_grad) {
    out->backward_fn = [xn](Node& self) {
      if (!xn->requires_grad) return;
      for (std::size_t i = 0; i < xn->data.size(); ++i) xn->grad[i] += self.grad[0];
    };
  }
  return wrap(std::move(out));
}

}  // namespace gaitattn
