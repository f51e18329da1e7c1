#pragma once

#include "iatsf/tensor.hpp"

namespace iatsf {

/// Sentinel used in place of -inf before softmax so arithmetic stays finite.
constexpr double kMaskValue = -1e30;

// All primitives record gradients on the active Graph when any input has
// grad_enabled. Tensors are treated as 2-D matrices ([1 x n] for 1-D inputs)
// unless stated otherwise.

Tensor matmul(const Tensor& a, const Tensor& b);    // [m x k] * [k x n]
Tensor transpose(const Tensor& a);                  // 2-D
Tensor add(const Tensor& a, const Tensor& b);       // elementwise, equal shapes
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_rowvec(const Tensor& a, const Tensor& v);  // broadcast row vector over rows
Tensor gelu(const Tensor& a);
Tensor softmax(const Tensor& x, int axis = -1);     // stable (max-subtracted)
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
Tensor masked_fill(const Tensor& scores, const Tensor& mask, double value);  // mask: 0/1, no grad
/// masked_fill + softmax with the contract that a fully-masked row is an
/// error (no unmasked key to attend to).
Tensor masked_softmax(const Tensor& scores, const Tensor& mask);
Tensor mse_loss(const Tensor& pred, const Tensor& target);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, size_t r0, size_t r1);  // [r0, r1)
Tensor slice_cols(const Tensor& a, size_t c0, size_t c1);  // [c0, c1)
Tensor reshape(const Tensor& a, Shape shape);              // same numel
/// Overlapping per-channel patches: [L] or [L x 1] -> [n_patches x patch_len],
/// strided with a right-aligned tail patch when the stride tiling stops short.
Tensor patchify(const Tensor& channel_series, size_t patch_len, size_t stride);
Tensor dropout(const Tensor& a, double p, Rng& rng);       // inverted dropout

/// Populates grads of every grad-enabled leaf reachable from loss.
/// Equivalent to Graph::current()->backward(loss).
void backward(const Tensor& loss);

}  // namespace iatsf
