#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "ricci/graph.hpp"

namespace ricci {

struct MetricsReport {
    std::string task;
    int runs = 0;
    std::uint64_t seed = 0;
    std::map<std::string, double> mean, stddev;

    std::string to_csv() const;
};

struct ClassifyConfig {
    int hidden = 64;
    double lr = 1e-2;
    double weight_decay = 5e-4;
    int epochs = 200;
    double dropout = 0.5;
    bool normalize_features = true;
};

// Trains a fresh two-layer GCN on (a, x) per run, selects the epoch by
// validation accuracy and reports test ACC / weighted-F1 / macro-F1.
MetricsReport classify(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x,
                       const std::vector<int>& labels, const Splits& splits, int runs,
                       std::uint64_t seed, const ClassifyConfig& cfg = {});

// k-means (best of 10 k-means++ inits, 300 iterations) with Hungarian-matched
// accuracy, NMI and ARI against the labels.
MetricsReport cluster(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels, int k,
                      int runs, std::uint64_t seed);

// Stratified per-class split (train_per_class, val_per_class, rest test).
Splits stratified_splits(const std::vector<int>& labels, int train_per_class, int val_per_class,
                         std::uint64_t seed);

// ---- primitives exposed for tests ----
std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, Rng& rng, int iters = 300,
                        int inits = 10);
// Maximum-agreement assignment between predicted clusters and labels.
double hungarian_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);
double nmi(const std::vector<int>& a, const std::vector<int>& b);
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);
// Minimum-cost assignment on a square cost matrix; returns column for each row.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

}  // namespace ricci
