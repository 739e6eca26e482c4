#include "ricci/gcn.hpp"

#include <cmath>

namespace ricci {

using ad::Matrix;
using ad::Tensor;

namespace {
Matrix glorot_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = rng.uniform(-limit, limit);
    return w;
}
}  // namespace

GcnParams GcnParams::glorot(int in_dim, int hidden, int out_dim, Rng& rng) {
    GcnParams p;
    p.w1 = Tensor::param(glorot_matrix(in_dim, hidden, rng));
    p.b1 = Tensor::param(Matrix::Zero(1, hidden));
    p.w2 = Tensor::param(glorot_matrix(hidden, out_dim, rng));
    p.b2 = Tensor::param(Matrix::Zero(1, out_dim));
    return p;
}

Tensor gcn_forward(const Tensor& norm_adj, const Tensor& h, const GcnParams& p,
                   const Tensor* drop_in, const Tensor* drop_hidden) {
    using namespace ad;
    Tensor input = drop_in ? mul(h, *drop_in) : h;
    Tensor hidden = relu(add(matmul(norm_adj, matmul(input, p.w1)), p.b1));
    if (drop_hidden) hidden = mul(hidden, *drop_hidden);
    return add(matmul(norm_adj, matmul(hidden, p.w2)), p.b2);
}

Tensor dropout_mask(Eigen::Index rows, Eigen::Index cols, double keep, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return Tensor::constant(std::move(m));
}

}  // namespace ricci
