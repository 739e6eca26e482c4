#include "ricci/manifold.hpp"

#include <cmath>
#include <stdexcept>

namespace ricci {

namespace {
constexpr double kBallMargin = 1e-5;

void require_same(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) throw std::runtime_error("gyro op: dimension mismatch");
}
}  // namespace

bool GyroPoint::valid() const {
    if (kappa >= 0.0) return true;
    return coords.squaredNorm() < 1.0 / -kappa;
}

double tan_k(double u, double kappa) { return kappa > 0.0 ? std::tan(u) : std::tanh(u); }

double atan_k(double u, double kappa) { return kappa > 0.0 ? std::atan(u) : std::atanh(u); }

Eigen::VectorXd project_to_ball(const Eigen::VectorXd& x, double kappa) {
    if (kappa >= 0.0) return x;
    double max_norm = (1.0 - kBallMargin) / std::sqrt(-kappa);
    double norm = x.norm();
    if (norm <= max_norm) return x;
    return x * (max_norm / norm);
}

Eigen::VectorXd gyro_add(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double kappa) {
    require_same(x, y);
    double xy = x.dot(y);
    double x2 = x.squaredNorm();
    double y2 = y.squaredNorm();
    double denom = 1.0 - 2.0 * kappa * xy + kappa * kappa * x2 * y2;
    Eigen::VectorXd out =
        ((1.0 - 2.0 * kappa * xy - kappa * y2) * x + (1.0 + kappa * x2) * y) / denom;
    return project_to_ball(out, kappa);
}

GyroPoint gyro_add(const GyroPoint& x, const GyroPoint& y) {
    if (x.kappa != y.kappa) throw std::runtime_error("gyro_add: curvature mismatch");
    return {gyro_add(x.coords, y.coords, x.kappa), x.kappa};
}

Eigen::VectorXd gyro_matvec(const Eigen::MatrixXd& w, const Eigen::VectorXd& x, double kappa) {
    if (w.cols() != x.size()) throw std::runtime_error("gyro_matvec: dimension mismatch");
    double xn = x.norm();
    if (xn < 1e-15) return Eigen::VectorXd::Zero(w.rows());
    Eigen::VectorXd wx = w * x;
    double wxn = wx.norm();
    if (wxn < 1e-15) return Eigen::VectorXd::Zero(w.rows());
    double sk = std::sqrt(std::abs(kappa));
    double scale = tan_k((wxn / xn) * atan_k(sk * xn, kappa), kappa) / (sk * wxn);
    return project_to_ball(scale * wx, kappa);
}

double gyro_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double kappa) {
    require_same(x, y);
    double sk = std::sqrt(std::abs(kappa));
    double norm = gyro_add(-x, y, kappa).norm();
    return 2.0 / sk * atan_k(sk * norm, kappa);
}

double gyro_distance(const GyroPoint& x, const GyroPoint& y) {
    if (x.kappa != y.kappa) throw std::runtime_error("gyro_distance: curvature mismatch");
    return gyro_distance(x.coords, y.coords, x.kappa);
}

Eigen::VectorXd log_map_zero(const Eigen::VectorXd& x, double kappa) {
    double xn = x.norm();
    if (xn < 1e-15) return Eigen::VectorXd::Zero(x.size());
    double sk = std::sqrt(std::abs(kappa));
    return (2.0 / sk * atan_k(sk * xn, kappa) / xn) * x;
}

Eigen::VectorXd egrad_to_rgrad(const Eigen::VectorXd& x, const Eigen::VectorXd& g, double kappa) {
    require_same(x, g);
    double lambda = 2.0 / (1.0 + kappa * x.squaredNorm());
    return g / (lambda * lambda);
}

void ManifoldConfig::validate() const {
    if (factors.empty()) throw std::runtime_error("manifold needs at least one curved factor");
    for (const auto& f : factors) {
        if (f.kappa == 0.0) throw std::runtime_error("factor curvature must be nonzero");
        if (f.dim <= 0) throw std::runtime_error("factor dimension must be positive");
    }
    if (euclidean_dim < 0) throw std::runtime_error("negative euclidean dimension");
}

double product_distance(const ProductPoint& p, const ProductPoint& q, const ManifoldConfig& cfg) {
    if (p.factors.size() != cfg.factors.size() || q.factors.size() != cfg.factors.size())
        throw std::runtime_error("product_distance: factor count mismatch");
    double sq = 0.0;
    for (std::size_t m = 0; m < cfg.factors.size(); ++m) {
        double d = gyro_distance(p.factors[m], q.factors[m], cfg.factors[m].kappa);
        sq += d * d;
    }
    // Rotational factor contributes through the radial coordinate only; the
    // sign of |p|-|q| is irrelevant inside the squared sum.
    double dr = p.euclidean.norm() - q.euclidean.norm();
    sq += dr * dr;
    return std::sqrt(sq);
}

ProductPoint ProductFeatures::point(int i) const {
    ProductPoint p;
    p.factors.reserve(factor_coords.size());
    for (const auto& block : factor_coords) p.factors.push_back(block.row(i).transpose());
    if (euclidean.size() > 0) p.euclidean = euclidean.row(i).transpose();
    else p.euclidean = Eigen::VectorXd::Zero(0);
    return p;
}

}  // namespace ricci
