#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ricci/rng.hpp"

namespace ricci {

struct Splits {
    std::vector<int> train, val, test;
    bool empty() const { return train.empty() && val.empty() && test.empty(); }
};

// Undirected graph with a dense nonnegative weighted adjacency (zero diagonal),
// optional node features, labels and train/val/test splits.
struct Graph {
    int n = 0;
    Eigen::MatrixXd adjacency;  // n x n, symmetric
    Eigen::MatrixXd features;   // n x F, 0x0 when absent
    std::vector<int> labels;    // empty when absent
    Splits splits;

    bool has_features() const { return features.size() > 0; }
    bool has_labels() const { return !labels.empty(); }
    bool has_splits() const { return !splits.empty(); }

    double weighted_degree(int i) const { return adjacency.row(i).sum(); }
    std::vector<int> neighbors(int i) const;
    // Number of undirected edges with positive weight.
    int num_edges() const;
    int num_classes() const;

    // Throws std::runtime_error on any violated invariant.
    void validate() const;
};

enum class GraphFormat { json, edge_tsv };

// Loads a graph. JSON follows the schema
//   {"num_nodes": n, "edges": [[i,j] or [i,j,w]], "features"?, "labels"?, "splits"?}.
// For edge_tsv the path is a TSV of `i<TAB>j[<TAB>w]` lines; feature rows are
// read from `<path minus extension>.features.csv` and labels from
// `<...>.labels.csv` when those files exist.
Graph load_graph(const std::string& path, GraphFormat format);

enum class ExportFormat { dot, json };
void export_graph(const Graph& g, ExportFormat format, const std::string& path);

// Zachary's karate club: 34 nodes, 78 edges, two community labels.
Graph make_karate();
// Two k-cliques joined by a single bridge edge.
Graph make_barbell(int k);
// Two-parameter stochastic block model; labels carry block ids.
Graph make_sbm(const std::vector<int>& sizes, double p_in, double p_out, std::uint64_t seed);

// L^alpha = alpha*I + (1-alpha)*D^{-1}A with weighted degrees. Rows of
// isolated nodes become identity rows.
Eigen::MatrixXd lazy_walk_matrix(const Graph& g, double alpha);

// Finite sentinel returned for disconnected pairs (dominates any real path).
inline double hop_sentinel(const Graph& g) { return 10.0 * g.n; }

// Unweighted shortest-path hop count; hop_sentinel(g) when disconnected.
double hop_distance(const Graph& g, int i, int j);
// BFS distances from src; sentinel for unreachable nodes.
Eigen::VectorXd hop_distances_from(const Graph& g, int src);
// Dijkstra over edge weights interpreted as lengths; sentinel when unreachable.
Eigen::VectorXd weighted_distances_from(const Graph& g, int src);

bool is_connected(const Graph& g);
// Largest connected component with features/labels/splits re-indexed.
Graph largest_component(const Graph& g, bool* was_disconnected = nullptr);

}  // namespace ricci
