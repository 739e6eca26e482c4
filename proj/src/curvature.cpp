#include "ricci/curvature.hpp"

#include <cmath>
#include <stdexcept>

#include "ricci/record_ops.hpp"

namespace ricci {

MassDistribution mass_distribution(const Graph& g, int u, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw std::runtime_error("alpha must lie in [0,1]");
    MassDistribution m;
    double deg = g.weighted_degree(u);
    if (deg <= 0.0) {
        m.support.push_back({u, 1.0});
        return m;
    }
    m.support.push_back({u, alpha});
    for (int v = 0; v < g.n; ++v) {
        double w = g.adjacency(u, v);
        if (w > 0.0) m.support.push_back({v, (1.0 - alpha) * w / deg});
    }
    return m;
}

double ollivier_ricci(const Graph& g, int i, int j, double alpha) {
    if (i == j) throw std::runtime_error("ollivier_ricci: i and j must differ");
    Eigen::VectorXd dist_i = hop_distances_from(g, i);
    if (dist_i(j) >= hop_sentinel(g))
        throw std::runtime_error("ollivier_ricci: disconnected pair");
    auto mi = mass_distribution(g, i, alpha);
    auto mj = mass_distribution(g, j, alpha);
    // Hop distances from the union of supports.
    std::vector<int> sources;
    for (const auto& [node, mass] : mi.support) sources.push_back(node);
    std::vector<Eigen::VectorXd> rows;
    rows.reserve(sources.size());
    for (int s : sources) rows.push_back(hop_distances_from(g, s));
    auto ground = [&](int a, int b) {
        for (std::size_t k = 0; k < sources.size(); ++k)
            if (sources[k] == a) return rows[k](b);
        throw std::runtime_error("ground distance queried outside supply support");
    };
    auto plan = wasserstein(mi, mj, ground);
    return 1.0 - plan.cost / dist_i(j);
}

std::optional<double> RicciMatrix::min_positive() const {
    std::optional<double> best;
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = i + 1; j < values.cols(); ++j)
            if (present(i, j) && values(i, j) > 0.0)
                if (!best || values(i, j) < *best) best = values(i, j);
    return best;
}

RicciMatrix ricci_matrix_exact(const Graph& g, double alpha, PairSelection pairs) {
    if (pairs == PairSelection::edges_only && g.n > 2000)
        throw std::runtime_error("ricci_matrix_exact: n > 2000 guard (edges_only)");
    if (pairs == PairSelection::all_connected && g.n > 300)
        throw std::runtime_error("ricci_matrix_exact: n > 300 guard (all_connected)");
    RicciMatrix out;
    out.kind = RicciKind::exact;
    out.alpha = alpha;
    out.values = Eigen::MatrixXd::Zero(g.n, g.n);
    out.present.setZero(g.n, g.n);

    std::vector<MassDistribution> masses(g.n);
    for (int u = 0; u < g.n; ++u) masses[u] = mass_distribution(g, u, alpha);
    // One BFS per node covers every ground-distance query.
    std::vector<Eigen::VectorXd> hop(g.n);
    for (int u = 0; u < g.n; ++u) hop[u] = hop_distances_from(g, u);
    auto ground = [&](int a, int b) { return hop[a](b); };

    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j) {
            bool want = pairs == PairSelection::edges_only ? g.adjacency(i, j) > 0.0
                                                           : hop[i](j) < hop_sentinel(g);
            if (!want) continue;
            if (hop[i](j) >= hop_sentinel(g)) continue;  // disconnected: excluded
            auto plan = wasserstein(masses[i], masses[j], ground);
            double ric = 1.0 - plan.cost / hop[i](j);
            out.values(i, j) = out.values(j, i) = ric;
            out.present(i, j) = out.present(j, i) = 1;
        }
    return out;
}

AffineMap random_affine_map(const ManifoldConfig& cfg, Rng& rng, double weight_scale,
                            double bias_scale) {
    AffineMap f;
    for (const auto& factor : cfg.factors) {
        AffineMap::Factor af;
        af.kappa = factor.kappa;
        af.weight.resize(factor.dim);
        for (int c = 0; c < factor.dim; ++c) af.weight(c) = rng.normal(0.0, weight_scale);
        double limit = factor.kappa < 0.0 ? bias_scale / std::sqrt(-factor.kappa) : bias_scale;
        af.bias = rng.uniform(-limit, limit);
        f.factors.push_back(std::move(af));
    }
    f.euclid_weight.resize(cfg.euclidean_dim);
    for (int c = 0; c < cfg.euclidean_dim; ++c) f.euclid_weight(c) = rng.normal(0.0, weight_scale);
    f.euclid_bias = rng.normal(0.0, bias_scale);
    return f;
}

AffineMap lipschitz_normalize(AffineMap f) {
    for (auto& factor : f.factors) {
        double norm = factor.weight.norm();  // spectral norm of a 1 x d map
        if (norm > 1.0) factor.weight /= norm;
    }
    double norm = f.euclid_weight.norm();
    if (norm > 1.0) f.euclid_weight /= norm;
    return f;
}

namespace {

double gyro_affine_scalar(const Eigen::VectorXd& x, const AffineMap::Factor& f) {
    double xn = x.norm();
    double sk = std::sqrt(std::abs(f.kappa));
    double y = 0.0;
    if (xn >= 1e-15) {
        double xw = f.weight.dot(x);
        y = tan_k((xw / xn) * atan_k(sk * xn, f.kappa), f.kappa) / sk;
    }
    // 1-D Mobius addition with the bias.
    double k = f.kappa, b = f.bias;
    double denom = 1.0 - 2.0 * k * y * b + k * k * y * y * b * b;
    return ((1.0 - 2.0 * k * y * b - k * b * b) * y + (1.0 + k * y * y) * b) / denom;
}

}  // namespace

Eigen::VectorXd affine_node_scalars(const ProductFeatures& x, const AffineMap& f) {
    if (x.factor_coords.size() != f.factors.size())
        throw std::runtime_error("affine_node_scalars: factor count mismatch");
    const Eigen::Index n = x.euclidean.size() > 0 ? x.euclidean.rows()
                                                  : x.factor_coords.at(0).rows();
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (std::size_t m = 0; m < f.factors.size(); ++m)
        for (Eigen::Index i = 0; i < n; ++i)
            s(i) += gyro_affine_scalar(x.factor_coords[m].row(i).transpose(), f.factors[m]);
    if (x.euclidean.size() > 0) s += x.euclidean * f.euclid_weight;
    s.array() += f.euclid_bias;
    return s;
}

ad::Tensor affine_scalars_record(const std::vector<ad::Tensor>& factor_coords,
                                 const std::vector<double>& kappas,
                                 const std::vector<ad::Tensor>& weights,
                                 const std::vector<ad::Tensor>& biases, const ad::Tensor& euclid,
                                 const ad::Tensor& w_e, const ad::Tensor& b_e) {
    using namespace ad;
    Tensor s;
    for (std::size_t m = 0; m < factor_coords.size(); ++m) {
        double kappa = kappas[m];
        double sk = std::sqrt(std::abs(kappa));
        const Tensor& x = factor_coords[m];
        Tensor xw = matmul(x, transpose(weights[m]));          // N x 1
        Tensor xn = add_scalar(row_norm(x), 1e-30);            // N x 1
        Tensor inner = atan_k_record(mul(xn, Tensor::constant(Matrix::Constant(1, 1, sk))), kappa);
        Tensor ratio = div(xw, xn);
        Tensor y = scale(tan_k_record(mul(ratio, inner), kappa), 1.0 / sk);  // N x 1
        // 1-D Mobius addition with the scalar bias.
        const Tensor& b = biases[m];
        Tensor yb = mul(y, b);
        Tensor y2 = square(y);
        Tensor b2 = square(b);
        Tensor num = mul(add_scalar(scale(yb, -2.0 * kappa) - scale(b2, kappa), 1.0), y) +
                     mul(add_scalar(scale(y2, kappa), 1.0), b);
        Tensor den = add_scalar(scale(yb, -2.0 * kappa) + scale(mul(y2, b2), kappa * kappa), 1.0);
        Tensor out = div(num, den);
        s = s.defined() ? add(s, out) : out;
    }
    Tensor e = add(matmul(euclid, w_e), b_e);
    s = s.defined() ? add(s, e) : e;
    return s;
}

Eigen::MatrixXd lazy_walk_from_adjacency(const Eigen::MatrixXd& a, double alpha) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double deg = a.row(i).sum();
        if (deg <= 0.0) {
            l(i, i) = 1.0;
            continue;
        }
        l(i, i) = alpha;
        l.row(i) += (1.0 - alpha) / deg * a.row(i);
    }
    return l;
}

RicciMatrix diff_ricci_matrix(const Eigen::MatrixXd& a, const ProductFeatures& x,
                              const AffineMap& f, double alpha, const GroundDistance& dist,
                              PairSelection pairs) {
    const Eigen::Index n = a.rows();
    Eigen::VectorXd s = affine_node_scalars(x, f);
    Eigen::VectorXd u = lazy_walk_from_adjacency(a, alpha) * s;
    RicciMatrix out;
    out.kind = RicciKind::differentiable;
    out.alpha = alpha;
    out.values = Eigen::MatrixXd::Zero(n, n);
    out.present.setZero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            if (pairs == PairSelection::edges_only && a(i, j) <= 0.0) continue;
            double d = dist(static_cast<int>(i), static_cast<int>(j));
            out.values(i, j) = d < 1e-8 ? 1.0 : 1.0 - (u(i) - u(j)) / d;
            out.present(i, j) = 1;
        }
    return out;
}

}  // namespace ricci
