#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace ricci {

// Frozen random draws defining one random feature map. kappa == 0 selects the
// Euclidean plane-wave form sqrt(2) cos(<w,x>+b); otherwise the curved wave
// exp(((n-1)/2) t) cos(lambda t + b) with t the kappa signed distance.
struct FeatureMapSpec {
    double kappa = 0.0;
    int dim_in = 0;
    int dim_out = 0;
    std::uint64_t seed = 0;
    Eigen::MatrixXd omegas;   // dim_out x dim_in, unit rows
    Eigen::VectorXd biases;   // in [0, 2*pi]
    Eigen::VectorXd lambdas;  // standard normal draws

    std::string to_json() const;
    static FeatureMapSpec from_json(const std::string& text);
};

FeatureMapSpec sample_feature_map(double kappa, int dim_in, int dim_out, std::uint64_t seed);

// (1/sqrt|k|) atan_k( sqrt|k| (|x|^2 - <w,x>) / (1 + <w,x>) ).
// Throws when the denominator degenerates.
double signed_distance(const Eigen::VectorXd& omega, const Eigen::VectorXd& x, double kappa);

Eigen::VectorXd apply_map(const FeatureMapSpec& spec, const Eigen::VectorXd& x);
// Row-wise application; returns N x dim_out.
Eigen::MatrixXd apply_map_rows(const FeatureMapSpec& spec, const Eigen::MatrixXd& xs);

// Monte Carlo kernel estimate <phi(x), phi(y)>.
double kernel_estimate(const FeatureMapSpec& spec, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y);

// Growth exponent clamp used before exponentiation in the curved wave.
inline constexpr double kFeatureMapExpClamp = 30.0;

}  // namespace ricci
