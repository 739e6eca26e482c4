#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ricci {

// Point of the kappa-stereographic model G^d_kappa = {x : -kappa|x|^2 < 1}.
// kappa < 0 is the Poincare ball of radius 1/sqrt(-kappa), kappa > 0 the
// stereographic sphere model.
struct GyroPoint {
    Eigen::VectorXd coords;
    double kappa = -1.0;
    bool valid() const;
};

// Curvature trigonometry: tan for kappa > 0, tanh for kappa < 0.
double tan_k(double u, double kappa);
double atan_k(double u, double kappa);

// Rescales x to just inside the ball when kappa < 0 and numerically outside.
Eigen::VectorXd project_to_ball(const Eigen::VectorXd& x, double kappa);

// Mobius addition x (+)_kappa y.
Eigen::VectorXd gyro_add(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double kappa);
GyroPoint gyro_add(const GyroPoint& x, const GyroPoint& y);

// Mobius matrix-vector action W (x)_kappa x; fixes the origin.
Eigen::VectorXd gyro_matvec(const Eigen::MatrixXd& w, const Eigen::VectorXd& x, double kappa);

// Geodesic distance (2/sqrt|k|) atan_k(sqrt|k| |(-x)(+)y|).
double gyro_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double kappa);
double gyro_distance(const GyroPoint& x, const GyroPoint& y);

// Logarithm at the origin; |log_0(x)| equals gyro_distance(0, x).
Eigen::VectorXd log_map_zero(const Eigen::VectorXd& x, double kappa);

// Euclidean-to-Riemannian gradient rescaling g / (lambda_x^kappa)^2 with the
// conformal factor lambda = 2 / (1 + kappa |x|^2).
Eigen::VectorXd egrad_to_rgrad(const Eigen::VectorXd& x, const Eigen::VectorXd& g, double kappa);

// Product of constant-curvature factors plus one Euclidean block whose norm
// acts as the radial coordinate.
struct ManifoldConfig {
    struct Factor {
        double kappa;
        int dim;
    };
    std::vector<Factor> factors;  // each kappa != 0
    int euclidean_dim = 0;

    int num_views() const { return static_cast<int>(factors.size()) + 1; }
    void validate() const;

    static ManifoldConfig default_config(int euclidean_dim) {
        return ManifoldConfig{{{-1.0, 32}, {+1.0, 32}}, euclidean_dim};
    }
};

struct ProductPoint {
    std::vector<Eigen::VectorXd> factors;
    Eigen::VectorXd euclidean;
};

// sqrt( sum_m d_kappa_m^2 + (|p_euc| - |q_euc|)^2 ).
double product_distance(const ProductPoint& p, const ProductPoint& q, const ManifoldConfig& cfg);

// Per-factor coordinate rows for all nodes (row i of factor_coords[m] is node
// i's component in factor m), plus the raw Euclidean block.
struct ProductFeatures {
    std::vector<Eigen::MatrixXd> factor_coords;
    std::vector<double> factor_kappas;
    Eigen::MatrixXd euclidean;

    ProductPoint point(int i) const;
};

}  // namespace ricci
