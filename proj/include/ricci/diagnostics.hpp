#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ricci/graph.hpp"

namespace ricci {

// First eigenvalue above 1e-8 of the symmetric normalized Laplacian
// I - D^{-1/2} A D^{-1/2}. Dense solve for n <= 500, Lanczos with full
// reorthogonalization and deflation of the known null vector beyond.
double spectral_gap(const Eigen::MatrixXd& adjacency);
double spectral_gap(const Graph& g);

// Second-smallest raw eigenvalue (no zero-skipping); 0 for disjoint unions.
double second_laplacian_eigenvalue(const Eigen::MatrixXd& adjacency);

// Exhaustive Cheeger constant, n <= 20. Returns (h, witness node set).
std::pair<double, std::vector<int>> cheeger_exact(const Graph& g);

struct OversquashReport {
    double spectral_gap = 0.0;
    double cheeger_lower = 0.0;  // spectral_gap / 2
    std::optional<double> cheeger;
    std::vector<int> cheeger_witness;
    std::optional<double> min_positive_edge_curvature;
    bool cheeger_inequality_holds = true;            // 2h >= lambda_1 (when h known)
    std::optional<bool> curvature_chain_holds;       // lambda_1 >= kappa_0 (when kappa_0 known)
    bool connected = true;

    std::string to_json() const;
};

OversquashReport diagnose(const Graph& g, double alpha);
OversquashReport diagnose_weighted(const Eigen::MatrixXd& adjacency, double alpha);

struct OversquashComparison {
    OversquashReport before, after;
    double delta_spectral_gap = 0.0;
    std::optional<double> delta_cheeger;

    std::string to_json() const;
};

OversquashComparison oversquash_report(const Graph& before, const Eigen::MatrixXd& after,
                                       double alpha);

}  // namespace ricci
