#include "ricci/transport.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace ricci {

double MassDistribution::total() const {
    double t = 0.0;
    for (const auto& [node, mass] : support) t += mass;
    return t;
}

void MassDistribution::validate() const {
    for (const auto& [node, mass] : support) {
        if (mass < 0.0) throw std::runtime_error("mass distribution has negative mass");
        if (node < 0) throw std::runtime_error("mass distribution has negative node index");
    }
    if (std::abs(total() - 1.0) > 1e-12)
        throw std::runtime_error("mass distribution does not sum to 1");
}

namespace {
constexpr double kMassEps = 1e-15;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

TransportPlan wasserstein(const MassDistribution& p, const MassDistribution& q,
                          const GroundDistance& ground) {
    p.validate();
    q.validate();
    const int ns = static_cast<int>(p.support.size());
    const int nt = static_cast<int>(q.support.size());

    std::vector<std::vector<double>> cost(ns, std::vector<double>(nt));
    for (int a = 0; a < ns; ++a)
        for (int b = 0; b < nt; ++b) {
            double c = ground(p.support[a].first, q.support[b].first);
            if (c < 0.0 || !std::isfinite(c))
                throw std::runtime_error("ground distance must be finite and nonnegative");
            cost[a][b] = c;
        }

    // Successive shortest paths over the bipartite network. Node ids:
    // sources 0..ns-1, sinks ns..ns+nt-1. Flow kept per (a,b) pair.
    std::vector<double> supply(ns), demand(nt);
    for (int a = 0; a < ns; ++a) supply[a] = p.support[a].second;
    for (int b = 0; b < nt; ++b) demand[b] = q.support[b].second;
    std::vector<std::vector<double>> flow(ns, std::vector<double>(nt, 0.0));
    std::vector<double> pot(ns + nt, 0.0);  // Johnson potentials

    double remaining = 0.0;
    for (int a = 0; a < ns; ++a) remaining += supply[a];

    int guard = 16 * (ns + nt) + 64;
    while (remaining > kMassEps) {
        if (--guard < 0) throw std::runtime_error("transport solver exceeded iteration guard");
        // Dijkstra from every unsaturated source under reduced costs.
        std::vector<double> dist(ns + nt, kInf);
        std::vector<int> parent(ns + nt, -1);  // for sinks: source it was reached from
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        for (int a = 0; a < ns; ++a)
            if (supply[a] > kMassEps) {
                dist[a] = 0.0;
                heap.push({0.0, a});
            }
        while (!heap.empty()) {
            auto [d, v] = heap.top();
            heap.pop();
            if (d > dist[v] + 1e-15) continue;
            if (v < ns) {
                int a = v;
                for (int b = 0; b < nt; ++b) {
                    double rc = cost[a][b] + pot[a] - pot[ns + b];
                    if (rc < 0.0) rc = 0.0;  // clip roundoff; invariant keeps rc >= 0
                    if (dist[a] + rc < dist[ns + b] - 1e-18) {
                        dist[ns + b] = dist[a] + rc;
                        parent[ns + b] = a;
                        heap.push({dist[ns + b], ns + b});
                    }
                }
            } else {
                int b = v - ns;
                for (int a = 0; a < ns; ++a) {
                    if (flow[a][b] <= kMassEps) continue;  // residual backward arc
                    double rc = -(cost[a][b] + pot[a] - pot[ns + b]);
                    if (rc < 0.0) rc = 0.0;
                    if (dist[v] + rc < dist[a] - 1e-18) {
                        dist[a] = dist[v] + rc;
                        parent[a] = v;
                        heap.push({dist[a], a});
                    }
                }
            }
        }
        // Cheapest reachable unsaturated sink.
        int best = -1;
        for (int b = 0; b < nt; ++b)
            if (demand[b] > kMassEps && dist[ns + b] < kInf &&
                (best < 0 || dist[ns + b] < dist[ns + best]))
                best = b;
        if (best < 0) throw std::runtime_error("transportation problem infeasible");

        // Walk the alternating path back to a source, find the bottleneck.
        std::vector<int> path;  // node ids from sink back to source
        int v = ns + best;
        path.push_back(v);
        while (parent[v] >= 0) {
            v = parent[v];
            path.push_back(v);
        }
        double push = demand[best];
        push = std::min(push, supply[path.back()]);
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            int to = path[k], from = path[k + 1];
            if (from < ns)  // forward arc: no capacity bound
                continue;
            push = std::min(push, flow[to][from - ns]);  // backward arc a<-b
        }
        // Apply the push.
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            int to = path[k], from = path[k + 1];
            if (from < ns)
                flow[from][to - ns] += push;
            else
                flow[to][from - ns] -= push;
        }
        supply[path.back()] -= push;
        demand[best] -= push;
        remaining -= push;

        // Update potentials with this round's distances.
        double dmax = dist[ns + best];
        for (int i = 0; i < ns + nt; ++i) pot[i] += std::min(dist[i], dmax);
    }

    // Dual feasibility u_a + v_b <= c_ab follows from nonnegative reduced
    // costs c_ab + pot_a - pot_b >= 0 with u = -pot (sources), v = +pot (sinks).
    TransportPlan plan;
    plan.u_potential.resize(ns);
    plan.v_potential.resize(nt);
    for (int a = 0; a < ns; ++a) plan.u_potential[a] = -pot[a];
    for (int b = 0; b < nt; ++b) plan.v_potential[b] = pot[ns + b];
    for (int a = 0; a < ns; ++a)
        for (int b = 0; b < nt; ++b)
            if (flow[a][b] > kMassEps) {
                plan.entries.push_back({p.support[a].first, q.support[b].first, flow[a][b]});
                plan.cost += flow[a][b] * cost[a][b];
            }
    for (int a = 0; a < ns; ++a) plan.dual_cost += plan.u_potential[a] * p.support[a].second;
    for (int b = 0; b < nt; ++b) plan.dual_cost += plan.v_potential[b] * q.support[b].second;
    return plan;
}

}  // namespace ricci
