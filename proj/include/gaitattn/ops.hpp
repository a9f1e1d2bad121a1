#pragma once

#include <vector>

#include "gaitattn/rng.hpp"
#include "gaitattn/tensor.hpp"

namespace gaitattn {

// Differentiable operations over Tensor. All ops record themselves in the
// graph whenever any input requires a gradient; forward math is 64-bit with
// a fixed sequential summation order so identical inputs give identical
// bytes.

// 1-D cross-correlation, stride 1, zero padding. x: [C_in, T],
// w: [C_out, C_in, K], b: [C_out] -> [C_out, T_out] with
// T_out = T + 2*padding - K + 1.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int padding);

// Elementwise max(0, x). Subgradient at 0 is 0.
Tensor relu(const Tensor& x);

// Non-overlapping max pooling over time: [C, T] -> [C, floor(T/k)]. The
// trailing remainder is dropped; gradient routes to the first maximal index
// of each window.
Tensor maxpool1d(const Tensor& x, int k);

// Mean over the time axis: [C, T] -> [C].
Tensor adaptive_avg_pool_to_1(const Tensor& x);

// W x + b. x: [N], W: [M, N], b: [M] -> [M].
Tensor linear(const Tensor& x, const Tensor& W, const Tensor& b);

// Numerically stable softmax over a 1-D tensor (max subtraction).
Tensor softmax(const Tensor& e);

// Inverted dropout: zero with probability p and scale survivors by 1/(1-p)
// when training; identity otherwise. 0 <= p < 1.
Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);

// Weighted binary cross-entropy on a single logit, in log-sum-exp-stable
// form: loss = pos_weight*y*softplus(-z) + (1-y)*softplus(z).
Tensor bce_with_logits(const Tensor& logit, double label, double pos_weight);

// Concatenation of 1-D tensors into one 1-D tensor.
Tensor concat(const std::vector<Tensor>& parts);

// Attention fusion: out = sum_i weights[i] * items[i]. weights: [S],
// items: S tensors of identical shape [D] -> [D].
Tensor weighted_sum(const Tensor& weights, const std::vector<Tensor>& items);

// Elementwise helpers (shapes must match exactly).
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);

// Sum of all elements -> scalar.
Tensor sum(const Tensor& x);

}  // namespace gaitattn
