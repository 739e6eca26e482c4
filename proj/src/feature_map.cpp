#include "ricci/feature_map.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "ricci/manifold.hpp"
#include "ricci/rng.hpp"

namespace ricci {

FeatureMapSpec sample_feature_map(double kappa, int dim_in, int dim_out, std::uint64_t seed) {
    if (dim_out < 1) throw std::runtime_error("sample_feature_map: dim_out must be >= 1");
    if (dim_in < 1) throw std::runtime_error("sample_feature_map: dim_in must be >= 1");
    FeatureMapSpec spec;
    spec.kappa = kappa;
    spec.dim_in = dim_in;
    spec.dim_out = dim_out;
    spec.seed = seed;
    spec.omegas.resize(dim_out, dim_in);
    spec.biases.resize(dim_out);
    spec.lambdas.resize(dim_out);
    Rng rng(seed);
    for (int i = 0; i < dim_out; ++i) {
        // Gaussian draw normalized to the sphere surface.
        Eigen::VectorXd w(dim_in);
        do {
            for (int c = 0; c < dim_in; ++c) w(c) = rng.normal();
        } while (w.norm() < 1e-12);
        spec.omegas.row(i) = w.transpose() / w.norm();
        spec.biases(i) = rng.uniform(0.0, 2.0 * std::numbers::pi);
        spec.lambdas(i) = rng.normal();
    }
    return spec;
}

// Horocycle bracket toward the ideal direction omega. For kappa < 0 this is
// the Busemann function of the ball model (the atan_k argument is
// tanh(B/2) = (<w,x> - |x|^2)/(1 - <w,x>), always inside (-1,1) on the open
// ball), oriented positive toward omega; it satisfies the translation cocycle
// identity exactly, which is what the kernel invariance rests on.
double signed_distance(const Eigen::VectorXd& omega, const Eigen::VectorXd& x, double kappa) {
    if (omega.size() != x.size()) throw std::runtime_error("signed_distance: dimension mismatch");
    double wx = omega.dot(x);
    double denom = 1.0 - wx;
    if (denom <= 1e-12) throw std::runtime_error("signed_distance: singular denominator 1-<w,x>");
    double sk = std::sqrt(std::abs(kappa));
    return 2.0 * atan_k(sk * (wx - x.squaredNorm()) / denom, kappa) / sk;
}

Eigen::VectorXd apply_map(const FeatureMapSpec& spec, const Eigen::VectorXd& x) {
    if (x.size() != spec.dim_in) throw std::runtime_error("apply_map: dimension mismatch");
    const int m = spec.dim_out;
    Eigen::VectorXd out(m);
    double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
    if (spec.kappa == 0.0) {
        for (int i = 0; i < m; ++i)
            out(i) = inv_sqrt_m * std::numbers::sqrt2 *
                     std::cos(spec.omegas.row(i).dot(x) + spec.biases(i));
        return out;
    }
    double growth = (spec.dim_in - 1) / 2.0;
    for (int i = 0; i < m; ++i) {
        double t = signed_distance(spec.omegas.row(i).transpose(), x, spec.kappa);
        double e = std::clamp(growth * t, -kFeatureMapExpClamp, kFeatureMapExpClamp);
        out(i) = inv_sqrt_m * std::exp(e) * std::cos(spec.lambdas(i) * t + spec.biases(i));
    }
    return out;
}

Eigen::MatrixXd apply_map_rows(const FeatureMapSpec& spec, const Eigen::MatrixXd& xs) {
    Eigen::MatrixXd out(xs.rows(), spec.dim_out);
    for (int r = 0; r < xs.rows(); ++r) out.row(r) = apply_map(spec, xs.row(r).transpose());
    return out;
}

double kernel_estimate(const FeatureMapSpec& spec, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y) {
    return apply_map(spec, x).dot(apply_map(spec, y));
}

std::string FeatureMapSpec::to_json() const {
    nlohmann::json doc;
    doc["kappa"] = kappa;
    doc["dim_in"] = dim_in;
    doc["dim_out"] = dim_out;
    doc["seed"] = seed;
    return doc.dump();
}

FeatureMapSpec FeatureMapSpec::from_json(const std::string& text) {
    auto doc = nlohmann::json::parse(text);
    return sample_feature_map(doc.at("kappa").get<double>(), doc.at("dim_in").get<int>(),
                              doc.at("dim_out").get<int>(), doc.at("seed").get<std::uint64_t>());
}

}  // namespace ricci
