#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace ricci {

// Finitely supported probability distribution over node indices.
struct MassDistribution {
    std::vector<std::pair<int, double>> support;  // (node, mass), masses sum to 1

    double total() const;
    // Throws unless masses are nonnegative and sum to 1 within 1e-12.
    void validate() const;
};

using GroundDistance = std::function<double(int, int)>;

// Exact solution of the discrete transportation problem.
struct TransportPlan {
    struct Entry {
        int src, dst;
        double mass;
    };
    std::vector<Entry> entries;
    double cost = 0.0;       // primal objective
    double dual_cost = 0.0;  // optimal dual objective; equals cost up to roundoff
    // Optimal dual variables aligned with the input supports: u[a] + v[b] <= c[a][b].
    std::vector<double> u_potential, v_potential;
};

// Exact optimal transport between p and q under the given ground distance,
// solved by successive shortest paths on the bipartite transportation network.
TransportPlan wasserstein(const MassDistribution& p, const MassDistribution& q,
                          const GroundDistance& ground);

}  // namespace ricci
