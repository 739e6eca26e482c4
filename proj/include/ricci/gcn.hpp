#pragma once

#include "ricci/autodiff.hpp"
#include "ricci/rng.hpp"

namespace ricci {

// Two-layer graph convolution Z = A_hat ReLU(A_hat H W1 + b1) W2 + b2 where
// A_hat is the symmetric normalization of the self-looped operator.
struct GcnParams {
    ad::Tensor w1, b1, w2, b2;

    static GcnParams glorot(int in_dim, int hidden, int out_dim, Rng& rng);
    std::vector<ad::Tensor> params() const { return {w1, b1, w2, b2}; }
};

// norm_adj is gcn_norm_adj(a_star). Optional dropout masks (same shape as the
// layer inputs, entries 0 or 1/keep) are applied before each layer.
ad::Tensor gcn_forward(const ad::Tensor& norm_adj, const ad::Tensor& h, const GcnParams& p,
                       const ad::Tensor* drop_in = nullptr, const ad::Tensor* drop_hidden = nullptr);

// Bernoulli(keep)/keep mask for dropout, as a constant tensor.
ad::Tensor dropout_mask(Eigen::Index rows, Eigen::Index cols, double keep, Rng& rng);

}  // namespace ricci
