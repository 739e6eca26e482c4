#include "ricci/record_ops.hpp"

#include <cmath>
#include <numbers>

namespace ricci {

using ad::Matrix;
using ad::Tensor;

Tensor tan_k_record(const Tensor& t, double kappa) {
    return kappa > 0.0 ? ad::tan(t) : ad::tanh(t);
}

Tensor atan_k_record(const Tensor& t, double kappa) {
    return kappa > 0.0 ? ad::atan(t) : ad::atanh(t);
}

Tensor mobius_add_record(const Tensor& x, const Tensor& y, double kappa) {
    using namespace ad;
    Tensor xy = row_sum(mul(x, y));            // N x 1
    Tensor x2 = square(row_norm(x));           // N x 1
    Tensor y2 = square(row_norm(y));           // N x 1
    Tensor coef_x = add_scalar(scale(xy, -2.0 * kappa) - scale(y2, kappa), 1.0);
    Tensor coef_y = add_scalar(scale(x2, kappa), 1.0);
    Tensor denom = add_scalar(scale(xy, -2.0 * kappa) + scale(mul(x2, y2), kappa * kappa), 1.0);
    return div(add(mul(coef_x, x), mul(coef_y, y)), denom);
}

Tensor gyro_distance_record(const Tensor& x, const Tensor& y, double kappa) {
    using namespace ad;
    double sk = std::sqrt(std::abs(kappa));
    Tensor m = mobius_add_record(neg(x), y, kappa);
    return scale(atan_k_record(scale(row_norm(m), sk), kappa), 2.0 / sk);
}

Tensor log_map_zero_record(const Tensor& x, double kappa) {
    using namespace ad;
    double sk = std::sqrt(std::abs(kappa));
    Tensor xn = add_scalar(row_norm(x), 1e-30);
    Tensor factor = scale(atan_k_record(scale(xn, sk), kappa), 2.0 / sk);
    return mul(div(factor, xn), x);
}

Tensor apply_map_record(const FeatureMapSpec& spec, const Tensor& x) {
    using namespace ad;
    const int m = spec.dim_out;
    double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
    Tensor omega_t = Tensor::constant(spec.omegas.transpose());     // n x m
    Tensor bias_row = Tensor::constant(Matrix(spec.biases.transpose()));
    Tensor xw = matmul(x, omega_t);                                 // N x m
    if (spec.kappa == 0.0)
        return scale(cos(add(xw, bias_row)), inv_sqrt_m * std::numbers::sqrt2);

    double sk = std::sqrt(std::abs(spec.kappa));
    Tensor lambda_row = Tensor::constant(Matrix(spec.lambdas.transpose()));
    Tensor sq = square(row_norm(x));                                // N x 1
    Tensor ratio = div(sub(xw, sq), add_scalar(neg(xw), 1.0));      // N x m
    Tensor t = scale(atan_k_record(scale(ratio, sk), spec.kappa), 2.0 / sk);
    double growth = (spec.dim_in - 1) / 2.0;
    Tensor e = exp(clamp(scale(t, growth), -kFeatureMapExpClamp, kFeatureMapExpClamp));
    Tensor wave = mul(e, cos(add(mul(t, lambda_row), bias_row)));
    return scale(wave, inv_sqrt_m);
}

}  // namespace ricci
