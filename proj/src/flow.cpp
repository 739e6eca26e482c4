#include "ricci/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "ricci/diagnostics.hpp"

namespace ricci {

namespace {
constexpr double kMinLength = 1e-6;
constexpr double kMaxLength = 1e6;
}  // namespace

Eigen::MatrixXd affinity_from_lengths(const Eigen::MatrixXd& lengths) {
    Eigen::MatrixXd aff = Eigen::MatrixXd::Zero(lengths.rows(), lengths.cols());
    for (Eigen::Index i = 0; i < lengths.rows(); ++i)
        for (Eigen::Index j = 0; j < lengths.cols(); ++j)
            if (lengths(i, j) > 0.0) aff(i, j) = 1.0 / lengths(i, j);
    return aff;
}

RicciMatrix weighted_ollivier_edges(const Graph& lengths, double alpha) {
    Graph affinity = lengths;
    affinity.adjacency = affinity_from_lengths(lengths.adjacency);

    RicciMatrix out;
    out.kind = RicciKind::exact;
    out.alpha = alpha;
    out.values = Eigen::MatrixXd::Zero(lengths.n, lengths.n);
    out.present.setZero(lengths.n, lengths.n);

    std::vector<MassDistribution> masses(lengths.n);
    for (int u = 0; u < lengths.n; ++u) masses[u] = mass_distribution(affinity, u, alpha);
    std::vector<Eigen::VectorXd> dist(lengths.n);
    for (int u = 0; u < lengths.n; ++u) dist[u] = weighted_distances_from(lengths, u);
    auto ground = [&](int a, int b) { return dist[a](b); };

    for (int i = 0; i < lengths.n; ++i)
        for (int j = i + 1; j < lengths.n; ++j) {
            if (lengths.adjacency(i, j) <= 0.0) continue;
            auto plan = wasserstein(masses[i], masses[j], ground);
            double ric = 1.0 - plan.cost / dist[i](j);
            out.values(i, j) = out.values(j, i) = ric;
            out.present(i, j) = out.present(j, i) = 1;
        }
    return out;
}

Graph flow_step(const Graph& g, const RicciMatrix& ric, double dt, FlowDirection direction) {
    if (dt <= 0.0) throw std::runtime_error("flow_step: dt must be positive");
    double max_ric = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.adjacency(i, j) > 0.0) {
                if (!ric.has(i, j)) throw std::runtime_error("flow_step: missing edge curvature");
                max_ric = std::max(max_ric, std::abs(ric.at(i, j)));
            }
    if (dt * max_ric >= 1.0) throw std::runtime_error("flow_step: dt * max|Ric| >= 1");

    Graph out = g;
    double sign = direction == FlowDirection::forward ? -1.0 : 1.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.adjacency(i, j) > 0.0) {
                double l = g.adjacency(i, j) * (1.0 + sign * ric.at(i, j) * dt);
                l = std::clamp(l, kMinLength, kMaxLength);
                out.adjacency(i, j) = out.adjacency(j, i) = l;
            }
    return out;
}

Graph surgery(const Graph& g, double remove_above, std::optional<double> add_below,
              bool* disconnected) {
    if (remove_above <= 0.0) throw std::runtime_error("surgery: remove threshold must be positive");
    Graph out = g;
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (out.adjacency(i, j) > remove_above)
                out.adjacency(i, j) = out.adjacency(j, i) = 0.0;
    if (add_below && *add_below > 0.0) {
        double t = *add_below;
        for (int i = 0; i < g.n; ++i)
            for (int j = i + 1; j < g.n; ++j) {
                if (g.adjacency(i, j) > 0.0 || out.adjacency(i, j) > 0.0) continue;
                double best = std::numeric_limits<double>::infinity();
                for (int k = 0; k < g.n; ++k)
                    if (g.adjacency(i, k) > 0.0 && g.adjacency(k, j) > 0.0)
                        best = std::min(best, g.adjacency(i, k) + g.adjacency(k, j));
                if (best < t) out.adjacency(i, j) = out.adjacency(j, i) = t;
            }
    }
    if (disconnected) *disconnected = !is_connected(out);
    return out;
}

FlowTrajectory run_flow(const Graph& g, int steps, double dt, FlowDirection direction,
                        double alpha, std::optional<SurgeryThresholds> surgery_spec) {
    if (g.n > 200) throw std::runtime_error("run_flow: n > 200 guard (exact per-step curvature)");
    if (!is_connected(g)) throw std::runtime_error("run_flow: graph must be connected");

    FlowTrajectory traj;
    Graph current = g;
    auto record = [&](int step) {
        FlowSnapshot snap;
        snap.step = step;
        snap.graph = current;
        snap.curvature = weighted_ollivier_edges(current, alpha);
        snap.spectral_gap = spectral_gap(affinity_from_lengths(current.adjacency));
        double mn = std::numeric_limits<double>::infinity();
        for (int i = 0; i < current.n; ++i)
            for (int j = i + 1; j < current.n; ++j)
                if (snap.curvature.has(i, j)) mn = std::min(mn, snap.curvature.at(i, j));
        snap.min_curvature = mn;
        traj.snapshots.push_back(std::move(snap));
    };
    record(0);
    for (int t = 1; t <= steps; ++t) {
        current = flow_step(current, traj.snapshots.back().curvature, dt, direction);
        if (surgery_spec) {
            bool disc = false;
            current = surgery(current, surgery_spec->remove_above, surgery_spec->add_below, &disc);
            traj.surgery_disconnected = traj.surgery_disconnected || disc;
        }
        record(t);
    }
    return traj;
}

}  // namespace ricci
