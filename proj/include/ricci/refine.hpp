#pragma once

#include <vector>

#include "ricci/autodiff.hpp"
#include "ricci/graph.hpp"

namespace ricci {

// One projection matrix per geometric view for the multihead cosine
// similarity driving edge probabilities.
struct SimilarityHeads {
    std::vector<ad::Tensor> proj;  // view input dim x head dim
};

// pi_ij = clamp( max(0, mean_m cos(S_m phi_m(x_i), S_m phi_m(x_j))), 1e-4, 1-1e-4 ).
ad::Tensor pairwise_similarity(const std::vector<ad::Tensor>& mapped_views,
                               const SimilarityHeads& heads);

// Pre-sampled logistic logits log(eps/(1-eps)) for the upper triangle.
Eigen::MatrixXd sample_noise_logits(Eigen::Index n, Rng& rng);

// Symmetric Gumbel-sigmoid relaxation of Bernoulli(pi) edges.
ad::Tensor sample_adjacency(const ad::Tensor& pi, double tau, Rng& rng);

// u = alpha s + (1-alpha) D^{-1} A* s for a relaxed adjacency.
ad::Tensor lazy_walk_apply(const ad::Tensor& a_star, const ad::Tensor& s, double alpha);

// D_ij = |u_i - u_j|, the backward-flow distance matrix (dense; small graphs).
ad::Tensor backward_flow_distance(const ad::Tensor& a_star, const ad::Tensor& s, double alpha);

// P = sigmoid((r - D)/s).
ad::Tensor fermi_dirac(const ad::Tensor& d, double r, double s);

struct PairSample {
    std::vector<std::pair<int, int>> positives;  // observed edges
    std::vector<std::pair<int, int>> negatives;  // sampled non-edges
};

PairSample sample_structure_pairs(const Eigen::MatrixXd& a_obs, int neg_per_pos, Rng& rng);

// Mean BCE over observed edges and sampled non-edges, taking a full P matrix.
ad::Tensor structure_loss(const Eigen::MatrixXd& a_obs, const ad::Tensor& p, int neg_per_pos,
                          Rng& rng);

// Same loss evaluated only at the sampled pairs (avoids dense N x N work).
ad::Tensor structure_loss_pairs(const ad::Tensor& a_star, const ad::Tensor& s, double alpha,
                                double fermi_r, double fermi_s, const PairSample& pairs);

ad::Tensor infonce(const ad::Tensor& za, const ad::Tensor& zb);

// (1/(M-1)) sum_m ( infonce(Z0, Zm) + infonce(Zm, Z0) ).
ad::Tensor feature_loss(const std::vector<ad::Tensor>& views);

struct RefinedGraph {
    Eigen::MatrixXd a_star;               // [0,1]^{N x N}, symmetric, zero diagonal
    Eigen::MatrixXd x_star;               // refined feature matrix
    std::vector<Eigen::MatrixXd> views;   // Z^0 .. Z^{M-1}
};

}  // namespace ricci
