#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ricci/autodiff.hpp"
#include "ricci/graph.hpp"
#include "ricci/manifold.hpp"
#include "ricci/transport.hpp"

namespace ricci {

// Lazy random walk mass: alpha at u, (1-alpha) spread over neighbours
// proportionally to edge weight.
MassDistribution mass_distribution(const Graph& g, int u, double alpha);

// Exact Ollivier curvature 1 - W(m_i, m_j)/d(i,j) with hop ground distance.
// Throws for disconnected pairs.
double ollivier_ricci(const Graph& g, int i, int j, double alpha);

enum class RicciKind { exact, differentiable };
enum class PairSelection { edges_only, all_connected };

struct RicciMatrix {
    Eigen::MatrixXd values;
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> present;
    RicciKind kind = RicciKind::exact;
    double alpha = 0.5;

    bool has(int i, int j) const { return present(i, j) != 0; }
    double at(int i, int j) const { return values(i, j); }
    // Minimum positive curvature over present edges, if any entry is positive.
    std::optional<double> min_positive() const;
};

// Pairwise exact curvature; guard n <= 2000 for edges_only, n <= 300 otherwise.
RicciMatrix ricci_matrix_exact(const Graph& g, double alpha, PairSelection pairs);

// Per-factor 1-D gyro affine maps plus a Euclidean affine map; the per-node
// scalars they produce act as a Kantorovich potential.
struct AffineMap {
    struct Factor {
        double kappa;
        Eigen::VectorXd weight;  // d_m entries
        double bias;             // 1-D gyro point
    };
    std::vector<Factor> factors;
    Eigen::VectorXd euclid_weight;
    double euclid_bias = 0.0;
};

AffineMap random_affine_map(const ManifoldConfig& cfg, Rng& rng, double weight_scale = 1.0,
                            double bias_scale = 0.1);

// Scales each weight by 1/max(1, spectral norm); biases untouched.
AffineMap lipschitz_normalize(AffineMap f);

// Plain (non-recorded) evaluation of the per-node affine scalars.
Eigen::VectorXd affine_node_scalars(const ProductFeatures& x, const AffineMap& f);

// Recorded evaluation used inside training graphs. factor_coords[m] is N x d_m,
// weights[m] is 1 x d_m, biases[m] is 1x1; euclid is N x F with w_e F x 1.
ad::Tensor affine_scalars_record(const std::vector<ad::Tensor>& factor_coords,
                                 const std::vector<double>& kappas,
                                 const std::vector<ad::Tensor>& weights,
                                 const std::vector<ad::Tensor>& biases, const ad::Tensor& euclid,
                                 const ad::Tensor& w_e, const ad::Tensor& b_e);

// L^alpha from an arbitrary nonnegative adjacency (isolated rows -> identity).
Eigen::MatrixXd lazy_walk_from_adjacency(const Eigen::MatrixXd& a, double alpha);

// Differentiable Ricci matrix 1 - ([L^a s]_i - [L^a s]_j)/dist(i,j) over the
// positive entries of `a` (or all pairs when all_pairs). Pairs closer than
// 1e-8 get curvature 1.
RicciMatrix diff_ricci_matrix(const Eigen::MatrixXd& a, const ProductFeatures& x,
                              const AffineMap& f, double alpha, const GroundDistance& dist,
                              PairSelection pairs = PairSelection::edges_only);

}  // namespace ricci
