#pragma once

#include <functional>
#include <vector>

#include "codinet/tensor.hpp"

namespace codinet {

// Elementwise arithmetic (same shape).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double c);
Tensor mul_scalar(const Tensor& a, double c);
/// Elementwise natural log; all entries must be positive.
Tensor log_elem(const Tensor& a);
/// Adds a constant (non-differentiable) vector, e.g. Gumbel noise.
Tensor add_const_vec(const Tensor& a, const std::vector<double>& c);

/// a[m,k] * b[k,p] -> [m,p].
Tensor matmul(const Tensor& a, const Tensor& b);

/// Cross-correlation of x[C_in,H,W] with k[C_out,C_in,3,3], zero padding 1,
/// stride 1; spatial extents are preserved.
Tensor conv2d(const Tensor& x, const Tensor& kernel);
/// x[C,H,W] + b[C] broadcast over the spatial plane.
Tensor add_channel_bias(const Tensor& x, const Tensor& b);

Tensor relu(const Tensor& x);
/// x[C,H,W] -> per-channel mean over H*W, shape [C].
Tensor global_avg_pool(const Tensor& x);
/// Max-subtracted softmax over a 1-d tensor.
Tensor softmax(const Tensor& logits);
/// -log softmax(logits)[label]; label must be a valid class index.
Tensor cross_entropy(const Tensor& logits, int label);

Tensor sum(const Tensor& a);
Tensor dot(const Tensor& a, const Tensor& b);
/// Scalar pick out of a 1-d tensor.
Tensor select(const Tensor& a, int index);
/// Packs n scalar tensors into one [n] tensor; gradients scatter back.
Tensor stack_scalars(const std::vector<Tensor>& scalars);
Tensor reshape(const Tensor& a, Shape shape);
/// x scaled by a scalar tensor s (broadcast).
Tensor scale_by(const Tensor& x, const Tensor& s);
/// 1 - v for a scalar tensor.
Tensor one_minus(const Tensor& v);
/// Forward hard-rounds v at 0.5; backward passes the gradient through
/// unchanged (straight-through estimator).
Tensor straight_through_round(const Tensor& v);

/// max(0, sqrt(sq) - margin)^2 for a scalar squared distance.
Tensor hinge_sq_over(const Tensor& sq_dist, double margin);
/// max(0, margin - sqrt(sq))^2; the gradient at sq == 0 uses the symmetric
/// subgradient 0 (cone point of the norm).
Tensor hinge_sq_under(const Tensor& sq_dist, double margin);

/// Elementwise mean of same-shape tensors, differentiable through all of
/// them. Errors on an empty list.
Tensor mean_of(const std::vector<Tensor>& tensors);

/// Maximum relative error between analytic gradients (reverse mode) and
/// central differences of `f`, taken over every element of `params`.
/// `f` must be deterministic across re-evaluations; relative error uses
/// denominator max(|a|,|b|,1e-8).
double finite_diff_check(const std::function<Tensor()>& f, const std::vector<Tensor>& params,
                         double h = 1e-5);

} // namespace codinet
