#pragma once

#include <optional>

#include "ricci/curvature.hpp"
#include "ricci/graph.hpp"

namespace ricci {

// Discrete Ricci flow on edge lengths. Edge weight is interpreted as a length;
// random-walk mass on the flowed graph uses affinity 1/length and ground
// distance is the weighted shortest path.
enum class FlowDirection { forward, backward };

struct FlowSnapshot {
    int step = 0;
    Graph graph;  // length-weighted
    RicciMatrix curvature;
    double spectral_gap = 0.0;  // of the affinity (1/length) graph
    double min_curvature = 0.0;
};

struct FlowTrajectory {
    std::vector<FlowSnapshot> snapshots;
    bool surgery_disconnected = false;
};

struct SurgeryThresholds {
    double remove_above;
    std::optional<double> add_below;
};

// Exact Ollivier curvature per edge of a length-weighted graph.
RicciMatrix weighted_ollivier_edges(const Graph& lengths, double alpha);

// Explicit Euler step: forward l <- l(1 - Ric dt), backward l <- l(1 + Ric dt),
// clamped to [1e-6, 1e6]. Requires dt * max|Ric| < 1.
Graph flow_step(const Graph& g, const RicciMatrix& ric, double dt, FlowDirection direction);

// Deletes edges longer than remove_above; inserts non-edges whose two-hop
// metric proximity falls below add_below. Sets *disconnected when the result
// splits the graph.
Graph surgery(const Graph& g, double remove_above, std::optional<double> add_below,
              bool* disconnected = nullptr);

FlowTrajectory run_flow(const Graph& g, int steps, double dt, FlowDirection direction,
                        double alpha, std::optional<SurgeryThresholds> surgery_spec = {});

// Affinity view of a length-weighted graph: w -> 1/w on existing edges.
Eigen::MatrixXd affinity_from_lengths(const Eigen::MatrixXd& lengths);

}  // namespace ricci
