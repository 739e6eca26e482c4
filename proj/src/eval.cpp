#include "ricci/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ricci/autodiff.hpp"
#include "ricci/gcn.hpp"
#include "ricci/trainer.hpp"

namespace ricci {

using ad::Matrix;
using ad::Tensor;

std::string MetricsReport::to_csv() const {
    std::ostringstream ss;
    ss << "metric,mean,stddev\n";
    ss.precision(17);
    for (const auto& [name, value] : mean)
        ss << name << "," << value << "," << stddev.at(name) << "\n";
    return ss.str();
}

// ---------------- assignment ----------------

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
    // O(k^3) potentials formulation; rows/cols are 1-based internally.
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != n) throw std::runtime_error("hungarian: square matrix required");
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            int i0 = p[j0], j1 = -1;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= n; ++j)
                if (!used[j]) {
                    double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if (cur < minv[j]) {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if (minv[j] < delta) {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> match(n);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) match[p[j] - 1] = j - 1;
    return match;
}

double hungarian_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw std::runtime_error("hungarian_accuracy: size mismatch");
    int k = 1 + std::max(*std::max_element(pred.begin(), pred.end()),
                         *std::max_element(truth.begin(), truth.end()));
    Eigen::MatrixXd agree = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t i = 0; i < pred.size(); ++i) agree(pred[i], truth[i]) += 1.0;
    auto match = hungarian(-agree);  // maximize agreement
    double hits = 0.0;
    for (int c = 0; c < k; ++c) hits += agree(c, match[c]);
    return hits / static_cast<double>(pred.size());
}

// ---------------- partition scores ----------------

namespace {
Eigen::MatrixXd contingency(const std::vector<int>& a, const std::vector<int>& b) {
    int ka = 1 + *std::max_element(a.begin(), a.end());
    int kb = 1 + *std::max_element(b.begin(), b.end());
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(ka, kb);
    for (std::size_t i = 0; i < a.size(); ++i) c(a[i], b[i]) += 1.0;
    return c;
}

double entropy(const Eigen::VectorXd& counts, double n) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < counts.size(); ++i)
        if (counts(i) > 0.0) {
            double p = counts(i) / n;
            h -= p * std::log(p);
        }
    return h;
}
}  // namespace

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty()) throw std::runtime_error("nmi: size mismatch");
    double n = static_cast<double>(a.size());
    Eigen::MatrixXd c = contingency(a, b);
    Eigen::VectorXd ra = c.rowwise().sum(), rb = c.colwise().sum();
    double mi = 0.0;
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        for (Eigen::Index j = 0; j < c.cols(); ++j)
            if (c(i, j) > 0.0)
                mi += c(i, j) / n * std::log(n * c(i, j) / (ra(i) * rb(j)));
    double ha = entropy(ra, n), hb = entropy(rb, n);
    double denom = (ha + hb) / 2.0;  // arithmetic normalization
    if (denom <= 0.0) return ha == hb ? 1.0 : 0.0;
    return mi / denom;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty()) throw std::runtime_error("ari: size mismatch");
    Eigen::MatrixXd c = contingency(a, b);
    auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double sum_ij = 0.0;
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        for (Eigen::Index j = 0; j < c.cols(); ++j) sum_ij += choose2(c(i, j));
    double sum_a = 0.0, sum_b = 0.0;
    Eigen::VectorXd ra = c.rowwise().sum(), rb = c.colwise().sum();
    for (Eigen::Index i = 0; i < ra.size(); ++i) sum_a += choose2(ra(i));
    for (Eigen::Index j = 0; j < rb.size(); ++j) sum_b += choose2(rb(j));
    double total = choose2(static_cast<double>(a.size()));
    double expected = sum_a * sum_b / total;
    double max_index = (sum_a + sum_b) / 2.0;
    if (std::abs(max_index - expected) < 1e-12) return sum_ij == max_index ? 1.0 : 0.0;
    return (sum_ij - expected) / (max_index - expected);
}

// ---------------- k-means ----------------

std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, Rng& rng, int iters, int inits) {
    const Eigen::Index n = points.rows();
    if (k < 1 || k > n) throw std::runtime_error("kmeans: bad k");
    std::vector<int> best_assign(n, 0);
    double best_inertia = std::numeric_limits<double>::infinity();
    for (int init = 0; init < inits; ++init) {
        // k-means++ seeding
        Eigen::MatrixXd centers(k, points.cols());
        centers.row(0) = points.row(rng.integer(0, n - 1));
        Eigen::VectorXd d2 =
            (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
        for (int c = 1; c < k; ++c) {
            double total = d2.sum();
            Eigen::Index pick = 0;
            if (total > 0.0) {
                double target = rng.uniform(0.0, total);
                double run = 0.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    run += d2(i);
                    if (run >= target) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = rng.integer(0, n - 1);
            }
            centers.row(c) = points.row(pick);
            d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
        }

        std::vector<int> assign(n, 0);
        for (int it = 0; it < iters; ++it) {
            bool changed = false;
            for (Eigen::Index i = 0; i < n; ++i) {
                int arg = 0;
                double best = (points.row(i) - centers.row(0)).squaredNorm();
                for (int c = 1; c < k; ++c) {
                    double d = (points.row(i) - centers.row(c)).squaredNorm();
                    if (d < best) {
                        best = d;
                        arg = c;
                    }
                }
                if (assign[i] != arg) {
                    assign[i] = arg;
                    changed = true;
                }
            }
            Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
            Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
            for (Eigen::Index i = 0; i < n; ++i) {
                sums.row(assign[i]) += points.row(i);
                counts(assign[i]) += 1.0;
            }
            for (int c = 0; c < k; ++c) {
                if (counts(c) > 0.0) {
                    centers.row(c) = sums.row(c) / counts(c);
                } else {
                    // Re-seed an empty cluster at the farthest point.
                    Eigen::Index far = 0;
                    double best = -1.0;
                    for (Eigen::Index i = 0; i < n; ++i) {
                        double d = (points.row(i) - centers.row(assign[i])).squaredNorm();
                        if (d > best) {
                            best = d;
                            far = i;
                        }
                    }
                    centers.row(c) = points.row(far);
                    changed = true;
                }
            }
            if (!changed && it > 0) break;
        }
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            inertia += (points.row(i) - centers.row(assign[i])).squaredNorm();
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_assign = assign;
        }
    }
    return best_assign;
}

// ---------------- downstream tasks ----------------

Splits stratified_splits(const std::vector<int>& labels, int train_per_class, int val_per_class,
                         std::uint64_t seed) {
    int k = 1 + *std::max_element(labels.begin(), labels.end());
    std::vector<std::vector<int>> by_class(k);
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));
    Rng rng(seed);
    Splits s;
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng.engine());
        int t = std::min<int>(train_per_class, static_cast<int>(members.size()));
        int v = std::min<int>(val_per_class, static_cast<int>(members.size()) - t);
        for (int i = 0; i < t; ++i) s.train.push_back(members[i]);
        for (int i = t; i < t + v; ++i) s.val.push_back(members[i]);
        for (int i = t + v; i < static_cast<int>(members.size()); ++i) s.test.push_back(members[i]);
    }
    return s;
}

namespace {

struct F1Scores {
    double weighted = 0.0, macro_avg = 0.0, acc = 0.0;
};

F1Scores f1_scores(const std::vector<int>& pred, const std::vector<int>& truth, int k) {
    Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t i = 0; i < pred.size(); ++i) confusion(truth[i], pred[i]) += 1.0;
    F1Scores out;
    double n = static_cast<double>(pred.size());
    out.acc = confusion.trace() / n;
    double weighted = 0.0, macro_sum = 0.0;
    for (int c = 0; c < k; ++c) {
        double tp = confusion(c, c);
        double support = confusion.row(c).sum();
        double predicted = confusion.col(c).sum();
        double precision = predicted > 0.0 ? tp / predicted : 0.0;
        double recall = support > 0.0 ? tp / support : 0.0;
        double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        weighted += f1 * support / n;
        macro_sum += f1;
    }
    out.weighted = weighted;
    out.macro_avg = macro_sum / k;
    return out;
}

std::vector<int> argmax_rows(const Matrix& logits) {
    std::vector<int> out(logits.rows());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Eigen::Index arg;
        logits.row(r).maxCoeff(&arg);
        out[r] = static_cast<int>(arg);
    }
    return out;
}

double subset_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                       const std::vector<int>& subset) {
    if (subset.empty()) return 0.0;
    double hits = 0.0;
    for (int i : subset)
        if (pred[i] == truth[i]) hits += 1.0;
    return hits / static_cast<double>(subset.size());
}

void finalize(MetricsReport& rep, const std::map<std::string, std::vector<double>>& samples) {
    for (const auto& [name, values] : samples) {
        double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= values.size();
        rep.mean[name] = mean;
        rep.stddev[name] = std::sqrt(var);
    }
}

}  // namespace

MetricsReport classify(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x,
                       const std::vector<int>& labels, const Splits& splits, int runs,
                       std::uint64_t seed, const ClassifyConfig& cfg) {
    if (labels.empty()) throw std::runtime_error("classify: labels required");
    if (splits.train.empty() || splits.test.empty())
        throw std::runtime_error("classify: train/test splits required");
    const int k = 1 + *std::max_element(labels.begin(), labels.end());
    const Eigen::Index n = a.rows();

    Matrix feats = x;
    if (cfg.normalize_features)
        for (Eigen::Index r = 0; r < feats.rows(); ++r) {
            double s = feats.row(r).cwiseAbs().sum();
            if (s > 0.0) feats.row(r) /= s;
        }

    // Normalized operator is constant across runs.
    Tensor norm_adj = ad::gcn_norm_adj(Tensor::constant(a));
    Tensor h = Tensor::constant(feats);

    std::map<std::string, std::vector<double>> samples;
    for (int run = 0; run < runs; ++run) {
        Rng rng(Rng(seed).fork(run).seed());
        GcnParams params = GcnParams::glorot(static_cast<int>(feats.cols()), cfg.hidden, k, rng);
        Adam opt;
        opt.lr = cfg.lr;
        opt.attach(params.params());

        double best_val = -1.0;
        double best_val_loss = std::numeric_limits<double>::infinity();
        F1Scores best_test;
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            Tensor drop_in, drop_hidden;
            const Tensor* di = nullptr;
            const Tensor* dh = nullptr;
            if (cfg.dropout > 0.0) {
                Rng drop_rng = rng.fork(77000 + epoch);
                drop_in = dropout_mask(n, feats.cols(), 1.0 - cfg.dropout, drop_rng);
                drop_hidden = dropout_mask(n, cfg.hidden, 1.0 - cfg.dropout, drop_rng);
                di = &drop_in;
                dh = &drop_hidden;
            }
            Tensor logits = gcn_forward(norm_adj, h, params, di, dh);
            Tensor loss = ad::softmax_cross_entropy(logits, labels, splits.train);
            if (cfg.weight_decay > 0.0)
                loss = ad::add(loss,
                               ad::scale(ad::sum(ad::square(params.w1)), cfg.weight_decay));
            ad::backward(loss);
            opt.step();

            // Deterministic evaluation pass (no dropout); epoch selection by
            // validation accuracy with validation loss as the tiebreak.
            Tensor eval_logits = gcn_forward(norm_adj, h, params);
            auto pred = argmax_rows(eval_logits.value());
            double val_acc = splits.val.empty() ? 1.0 : subset_accuracy(pred, labels, splits.val);
            double val_loss =
                splits.val.empty()
                    ? 0.0
                    : ad::softmax_cross_entropy(eval_logits, labels, splits.val).scalar();
            if (val_acc > best_val || (val_acc == best_val && val_loss < best_val_loss)) {
                best_val = val_acc;
                best_val_loss = val_loss;
                std::vector<int> test_pred, test_truth;
                for (int i : splits.test) {
                    test_pred.push_back(pred[i]);
                    test_truth.push_back(labels[i]);
                }
                best_test = f1_scores(test_pred, test_truth, k);
            }
        }
        samples["acc"].push_back(best_test.acc);
        samples["weighted_f1"].push_back(best_test.weighted);
        samples["macro_f1"].push_back(best_test.macro_avg);
        samples["val_acc"].push_back(best_val);
    }

    MetricsReport rep;
    rep.task = "classify";
    rep.runs = runs;
    rep.seed = seed;
    finalize(rep, samples);
    return rep;
}

MetricsReport cluster(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels, int k,
                      int runs, std::uint64_t seed) {
    if (k < 2) throw std::runtime_error("cluster: k must be >= 2");
    if (k > embeddings.rows()) throw std::runtime_error("cluster: k exceeds point count");
    std::map<std::string, std::vector<double>> samples;
    for (int run = 0; run < runs; ++run) {
        Rng rng(Rng(seed).fork(run).seed());
        auto assign = kmeans(embeddings, k, rng);
        samples["acc"].push_back(hungarian_accuracy(assign, labels));
        samples["nmi"].push_back(nmi(assign, labels));
        samples["ari"].push_back(adjusted_rand_index(assign, labels));
    }
    MetricsReport rep;
    rep.task = "cluster";
    rep.runs = runs;
    rep.seed = seed;
    finalize(rep, samples);
    return rep;
}

}  // namespace ricci
