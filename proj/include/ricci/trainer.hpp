#pragma once

#include <array>
#include <string>
#include <vector>

#include "ricci/curvature.hpp"
#include "ricci/feature_map.hpp"
#include "ricci/gcn.hpp"
#include "ricci/graph.hpp"
#include "ricci/manifold.hpp"
#include "ricci/refine.hpp"

namespace ricci {

enum class Ablation { none, no_gyro, no_ricci, no_feature };

struct TrainConfig {
    double beta = 0.5;   // structure/feature balance
    double alpha = 0.5;  // walk laziness
    int epochs = 400;
    double lr_euclidean = 1e-2;
    double lr_riemannian = 5e-3;
    double tau = 0.5;
    double fermi_r = 2.0;
    double fermi_s = 1.0;
    int neg_per_pos = 5;
    std::vector<ManifoldConfig::Factor> factors{{-1.0, 32}, {+1.0, 32}};
    int map_dim = 64;  // feature-map output dim for factor views
    int gcn_hidden = 64;
    int gcn_out = 32;
    int head_dim = 16;
    int final_samples = 8;
    double export_threshold = 1e-3;
    bool normalize_features = true;
    std::uint64_t seed = 1;
    Ablation ablation = Ablation::none;
    int log_every = 0;

    // Flat `key = value` text, one pair per line, '#' comments.
    static TrainConfig from_file(const std::string& path);
    static TrainConfig from_text(const std::string& text);
    std::string to_text() const;
};

// Adam over Euclidean leaf tensors.
struct Adam {
    double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    int t = 0;
    std::vector<ad::Tensor> params;
    std::vector<ad::Matrix> m, v;

    void attach(const std::vector<ad::Tensor>& ps);
    void step();
};

// Single-point Riemannian Adam step used row-wise on gyro parameter blocks.
struct RiemannianAdamPointState {
    Eigen::VectorXd m, v;
    int t = 0;
};
Eigen::VectorXd riemannian_update(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                                  double kappa, double lr, RiemannianAdamPointState& state,
                                  double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Riemannian Adam over rows of gyro parameter matrices.
struct RiemannianAdam {
    double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    int t = 0;
    std::vector<ad::Tensor> params;
    std::vector<double> kappas;
    std::vector<ad::Matrix> m, v;

    void attach(const std::vector<ad::Tensor>& ps, const std::vector<double>& ks);
    void step();
};

struct ModelState {
    ManifoldConfig manifold;
    std::vector<ad::Tensor> factor_features;  // learnable, N x d_m
    std::vector<FeatureMapSpec> factor_maps;
    FeatureMapSpec euclid_map;
    Eigen::MatrixXd raw_features;     // preprocessed
    Eigen::MatrixXd euclid_mapped;    // plane waves of raw features
    SimilarityHeads heads;
    std::vector<ad::Tensor> affine_weights;  // 1 x d_m
    std::vector<ad::Tensor> affine_biases;   // 1 x 1 gyro scalars
    ad::Tensor affine_w_e;                   // F x 1
    ad::Tensor affine_b_e;                   // 1 x 1
    std::vector<GcnParams> gcn;              // one per view
    Ablation ablation = Ablation::none;

    // Mapped factor views (respecting the -Gyro switch), recorded.
    std::vector<ad::Tensor> mapped_views() const;
};

struct LossRecord {
    double total, structure, feature;
};

struct TrainResult {
    RefinedGraph refined;
    ModelState state;
    std::vector<LossRecord> history;
    bool input_was_disconnected = false;
};

// Initializes every learnable block from the config seed; g must be connected.
ModelState init_model(const Graph& g, const TrainConfig& cfg);

std::vector<ad::Tensor> euclidean_parameters(const ModelState& state);
// (tensor, curvature) pairs updated by the Riemannian optimizer.
std::vector<std::pair<ad::Tensor, double>> riemannian_parameters(const ModelState& state);

// Per-epoch stochastic inputs: Gumbel noise logits and the BCE pair sample.
struct EpochInputs {
    Eigen::MatrixXd noise_logits;
    PairSample pairs;

    static EpochInputs sample(const Graph& g, const TrainConfig& cfg, Rng& rng);
};

struct EpochLoss {
    ad::Tensor total, structure, feature;
};

// Records one full forward pass of the co-refinement objective.
EpochLoss build_epoch_loss(const ModelState& state, const Graph& g, const TrainConfig& cfg,
                           const EpochInputs& inputs);

TrainResult train(const Graph& g, const TrainConfig& cfg);

// X* = concat(raw, phi(x^k1), ..., phi(x^kM-1)); raw only under -Feature,
// log maps under -Gyro.
Eigen::MatrixXd refined_features(const ModelState& state);

// Finite-difference verification of every loss component and of the combined
// objective on a small random graph. Names are stable for reporting.
std::vector<std::pair<std::string, ad::GradCheckReport>> gradcheck_suite(std::uint64_t seed);

}  // namespace ricci
