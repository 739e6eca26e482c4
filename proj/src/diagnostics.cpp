#include "ricci/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "ricci/curvature.hpp"

namespace ricci {

namespace {

constexpr double kZeroTol = 1e-8;

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    Eigen::VectorXd deg = a.rowwise().sum();
    Eigen::VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) c(i) = deg(i) > 0.0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
    Eigen::MatrixXd l = -(c.asDiagonal() * a * c.asDiagonal());
    for (Eigen::Index i = 0; i < n; ++i) l(i, i) += deg(i) > 0.0 ? 1.0 : 0.0;
    return l;
}

Eigen::VectorXd dense_spectrum(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(normalized_laplacian(a));
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
    return solver.eigenvalues();
}

// Smallest eigenvalue of L restricted to the complement of its known null
// vector D^{1/2} 1, via Lanczos with full reorthogonalization.
double lanczos_gap(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd l = normalized_laplacian(a);
    Eigen::VectorXd null_vec = a.rowwise().sum().array().max(0.0).sqrt();
    double nn = null_vec.norm();
    if (nn <= 0.0) throw std::runtime_error("spectral_gap: empty graph");
    null_vec /= nn;

    const int max_iter = static_cast<int>(std::min<Eigen::Index>(n - 1, 220));
    std::vector<Eigen::VectorXd> basis;
    basis.reserve(max_iter);
    Eigen::VectorXd alpha_d(max_iter), beta_d(max_iter);

    // Deterministic start vector orthogonal to the null vector.
    Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0 + n);
    q -= null_vec.dot(q) * null_vec;
    q.normalize();

    int k = 0;
    double beta_prev = 0.0;
    Eigen::VectorXd q_prev = Eigen::VectorXd::Zero(n);
    for (; k < max_iter; ++k) {
        basis.push_back(q);
        Eigen::VectorXd w = l * q;
        double alpha = q.dot(w);
        alpha_d(k) = alpha;
        w -= alpha * q + beta_prev * q_prev;
        // Deflation and full reorthogonalization.
        w -= null_vec.dot(w) * null_vec;
        for (const auto& b : basis) w -= b.dot(w) * b;
        for (const auto& b : basis) w -= b.dot(w) * b;
        double beta = w.norm();
        beta_d(k) = beta;
        if (beta < 1e-12) {
            ++k;
            break;
        }
        q_prev = q;
        q = w / beta;
        beta_prev = beta;
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        t(i, i) = alpha_d(i);
        if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta_d(i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
    return solver.eigenvalues()(0);
}

}  // namespace

double spectral_gap(const Eigen::MatrixXd& adjacency) {
    if (adjacency.rows() == 0) throw std::runtime_error("spectral_gap: empty graph");
    if (adjacency.rows() <= 500) {
        Eigen::VectorXd ev = dense_spectrum(adjacency);
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            if (ev(i) > kZeroTol) return ev(i);
        return 0.0;
    }
    return lanczos_gap(adjacency);
}

double spectral_gap(const Graph& g) { return spectral_gap(g.adjacency); }

double second_laplacian_eigenvalue(const Eigen::MatrixXd& adjacency) {
    if (adjacency.rows() < 2) throw std::runtime_error("need at least two nodes");
    if (adjacency.rows() <= 500) return dense_spectrum(adjacency)(1);
    return lanczos_gap(adjacency);
}

std::pair<double, std::vector<int>> cheeger_exact(const Graph& g) {
    if (g.n > 20) throw std::runtime_error("cheeger_exact: n > 20 guard");
    if (g.n < 2) throw std::runtime_error("cheeger_exact: need at least two nodes");
    Eigen::VectorXd deg = g.adjacency.rowwise().sum();
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_mask = 0;
    // Node 0 pinned outside the subset; complements are equivalent.
    const std::uint32_t limit = 1u << (g.n - 1);
    for (std::uint32_t mask = 1; mask < limit; ++mask) {
        double vol_in = 0.0, boundary = 0.0;
        for (int v = 0; v < g.n - 1; ++v) {
            if (!(mask >> v & 1)) continue;
            vol_in += deg(v + 1);
            for (int u = 0; u < g.n; ++u) {
                bool u_inside = u > 0 && (mask >> (u - 1) & 1);
                if (!u_inside) boundary += g.adjacency(v + 1, u);
            }
        }
        double vol_out = deg.sum() - vol_in;
        double denom = std::min(vol_in, vol_out);
        if (denom <= 0.0) continue;
        double ratio = boundary / denom;
        if (ratio < best) {
            best = ratio;
            best_mask = mask;
        }
    }
    std::vector<int> witness;
    for (int v = 0; v < g.n - 1; ++v)
        if (best_mask >> v & 1) witness.push_back(v + 1);
    return {best, witness};
}

OversquashReport diagnose_weighted(const Eigen::MatrixXd& adjacency, double alpha) {
    OversquashReport rep;
    Graph g;
    g.n = static_cast<int>(adjacency.rows());
    g.adjacency = adjacency;
    rep.connected = is_connected(g);
    rep.spectral_gap = spectral_gap(adjacency);
    rep.cheeger_lower = rep.spectral_gap / 2.0;
    if (g.n <= 20) {
        auto [h, witness] = cheeger_exact(g);
        rep.cheeger = h;
        rep.cheeger_witness = witness;
        rep.cheeger_inequality_holds = 2.0 * h >= rep.spectral_gap - 1e-9;
    }
    if (g.n <= 2000) {
        auto ric = ricci_matrix_exact(g, alpha, PairSelection::edges_only);
        if (auto k0 = ric.min_positive()) {
            rep.min_positive_edge_curvature = *k0;
            rep.curvature_chain_holds = rep.spectral_gap >= *k0 - 1e-9;
        }
    }
    return rep;
}

OversquashReport diagnose(const Graph& g, double alpha) {
    return diagnose_weighted(g.adjacency, alpha);
}

OversquashComparison oversquash_report(const Graph& before, const Eigen::MatrixXd& after,
                                       double alpha) {
    if (before.n != after.rows()) throw std::runtime_error("oversquash_report: node count differs");
    OversquashComparison cmp;
    cmp.before = diagnose(before, alpha);
    cmp.after = diagnose_weighted(after, alpha);
    cmp.delta_spectral_gap = cmp.after.spectral_gap - cmp.before.spectral_gap;
    if (cmp.before.cheeger && cmp.after.cheeger)
        cmp.delta_cheeger = *cmp.after.cheeger - *cmp.before.cheeger;
    return cmp;
}

namespace {
nlohmann::json report_json(const OversquashReport& r) {
    nlohmann::json doc;
    doc["spectral_gap"] = r.spectral_gap;
    doc["cheeger_lower_bound"] = r.cheeger_lower;
    doc["connected"] = r.connected;
    if (r.cheeger) {
        doc["cheeger_exact"] = *r.cheeger;
        doc["cheeger_witness"] = r.cheeger_witness;
        doc["cheeger_inequality_holds"] = r.cheeger_inequality_holds;
    }
    if (r.min_positive_edge_curvature) {
        doc["min_positive_edge_curvature"] = *r.min_positive_edge_curvature;
        doc["curvature_chain_holds"] = *r.curvature_chain_holds;
    }
    return doc;
}
}  // namespace

std::string OversquashReport::to_json() const { return report_json(*this).dump(2); }

std::string OversquashComparison::to_json() const {
    nlohmann::json doc;
    doc["before"] = report_json(before);
    doc["after"] = report_json(after);
    doc["delta_spectral_gap"] = delta_spectral_gap;
    if (delta_cheeger) doc["delta_cheeger"] = *delta_cheeger;
    return doc.dump(2);
}

}  // namespace ricci
