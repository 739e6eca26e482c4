#include "ricci/refine.hpp"

#include <cmath>
#include <stdexcept>

namespace ricci {

using ad::Matrix;
using ad::Tensor;

Tensor pairwise_similarity(const std::vector<Tensor>& mapped_views, const SimilarityHeads& heads) {
    using namespace ad;
    if (mapped_views.size() != heads.proj.size())
        throw std::runtime_error("pairwise_similarity: view/head count mismatch");
    Tensor acc;
    for (std::size_t m = 0; m < mapped_views.size(); ++m) {
        Tensor u = matmul(mapped_views[m], heads.proj[m]);
        Tensor norms = add_scalar(row_norm(u), 1e-30);
        Tensor un = div(u, norms);
        Tensor cosine = matmul(un, transpose(un));
        acc = acc.defined() ? add(acc, cosine) : cosine;
    }
    Tensor pi = scale(acc, 1.0 / static_cast<double>(mapped_views.size()));
    return clamp(pi, 1e-4, 1.0 - 1e-4);
}

Eigen::MatrixXd sample_noise_logits(Eigen::Index n, Rng& rng) {
    Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double eps = rng.uniform(1e-12, 1.0 - 1e-12);
            noise(i, j) = std::log(eps / (1.0 - eps));
        }
    return noise;
}

Tensor sample_adjacency(const Tensor& pi, double tau, Rng& rng) {
    if (tau <= 0.0) throw std::runtime_error("sample_adjacency: tau must be positive");
    return ad::gumbel_sigmoid_sym(pi, sample_noise_logits(pi.rows(), rng), tau);
}

Tensor lazy_walk_apply(const Tensor& a_star, const Tensor& s, double alpha) {
    using namespace ad;
    Tensor deg = add_scalar(row_sum(a_star), 1e-12);
    Tensor walk = div(matmul(a_star, s), deg);
    return add(scale(s, alpha), scale(walk, 1.0 - alpha));
}

Tensor backward_flow_distance(const Tensor& a_star, const Tensor& s, double alpha) {
    using namespace ad;
    Tensor u = lazy_walk_apply(a_star, s, alpha);
    const Eigen::Index n = u.rows();
    Tensor ones_row = Tensor::constant(Matrix::Ones(1, n));
    Tensor ones_col = Tensor::constant(Matrix::Ones(n, 1));
    Tensor diff = sub(matmul(u, ones_row), matmul(ones_col, transpose(u)));
    return abs(diff);
}

Tensor fermi_dirac(const Tensor& d, double r, double s) {
    if (s <= 0.0) throw std::runtime_error("fermi_dirac: s must be positive");
    return ad::sigmoid(ad::scale(ad::add_scalar(ad::neg(d), r), 1.0 / s));
}

PairSample sample_structure_pairs(const Eigen::MatrixXd& a_obs, int neg_per_pos, Rng& rng) {
    const Eigen::Index n = a_obs.rows();
    PairSample out;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (a_obs(i, j) > 0.0) out.positives.push_back({static_cast<int>(i), static_cast<int>(j)});
    if (neg_per_pos <= 0 || out.positives.empty()) return out;

    const std::size_t wanted = out.positives.size() * static_cast<std::size_t>(neg_per_pos);
    const std::size_t max_tries = wanted * 64 + 256;
    std::size_t tries = 0;
    while (out.negatives.size() < wanted && tries++ < max_tries) {
        int i = static_cast<int>(rng.integer(0, n - 1));
        int j = static_cast<int>(rng.integer(0, n - 1));
        if (i == j || a_obs(i, j) > 0.0) continue;
        out.negatives.push_back({i, j});
    }
    return out;
}

Tensor structure_loss(const Eigen::MatrixXd& a_obs, const Tensor& p, int neg_per_pos, Rng& rng) {
    using namespace ad;
    PairSample pairs = sample_structure_pairs(a_obs, neg_per_pos, rng);
    const Eigen::Index n = a_obs.rows();
    Matrix pos_mask = Matrix::Zero(n, n), neg_mask = Matrix::Zero(n, n);
    for (auto [i, j] : pairs.positives) pos_mask(i, j) += 1.0;
    for (auto [i, j] : pairs.negatives) neg_mask(i, j) += 1.0;
    double count = static_cast<double>(pairs.positives.size() + pairs.negatives.size());
    if (count == 0.0) return Tensor::constant(0.0);
    Tensor ll = add(mul(Tensor::constant(pos_mask), log(p)),
                    mul(Tensor::constant(neg_mask), log(add_scalar(neg(p), 1.0))));
    return scale(sum(ll), -1.0 / count);
}

Tensor structure_loss_pairs(const Tensor& a_star, const Tensor& s, double alpha, double fermi_r,
                            double fermi_s, const PairSample& pairs) {
    using namespace ad;
    double count = static_cast<double>(pairs.positives.size() + pairs.negatives.size());
    if (count == 0.0) return Tensor::constant(0.0);
    Tensor u = lazy_walk_apply(a_star, s, alpha);
    Tensor acc;
    if (!pairs.positives.empty()) {
        Tensor d = abs(gather_pair_diff(u, pairs.positives));
        // -log sigmoid(z) = softplus(-z) with z = (r - d)/s.
        Tensor z = scale(add_scalar(neg(d), fermi_r), 1.0 / fermi_s);
        acc = sum(softplus(neg(z)));
    }
    if (!pairs.negatives.empty()) {
        Tensor d = abs(gather_pair_diff(u, pairs.negatives));
        Tensor z = scale(add_scalar(neg(d), fermi_r), 1.0 / fermi_s);
        Tensor t = sum(softplus(z));
        acc = acc.defined() ? add(acc, t) : t;
    }
    return scale(acc, 1.0 / count);
}

Tensor infonce(const Tensor& za, const Tensor& zb) { return ad::infonce_loss(za, zb); }

Tensor feature_loss(const std::vector<Tensor>& views) {
    using namespace ad;
    if (views.size() < 2) throw std::runtime_error("feature_loss: need at least two views");
    Tensor acc;
    for (std::size_t m = 1; m < views.size(); ++m) {
        Tensor t = add(infonce(views[0], views[m]), infonce(views[m], views[0]));
        acc = acc.defined() ? add(acc, t) : t;
    }
    return scale(acc, 1.0 / static_cast<double>(views.size() - 1));
}

}  // namespace ricci
