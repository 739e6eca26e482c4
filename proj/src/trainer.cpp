#include "ricci/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "ricci/record_ops.hpp"

namespace ricci {

using ad::Matrix;
using ad::Tensor;

// ---------------- config ----------------

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    auto b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

std::vector<ManifoldConfig::Factor> parse_factors(const std::string& text) {
    // "-1:32,+1:32"
    std::vector<ManifoldConfig::Factor> out;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) throw std::runtime_error("bad factors entry: " + item);
        out.push_back({std::stod(item.substr(0, colon)), std::stoi(item.substr(colon + 1))});
    }
    if (out.empty()) throw std::runtime_error("factors must not be empty");
    return out;
}

std::string factors_text(const std::vector<ManifoldConfig::Factor>& fs) {
    std::ostringstream ss;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (i) ss << ",";
        ss << fs[i].kappa << ":" << fs[i].dim;
    }
    return ss.str();
}

Ablation parse_ablation(const std::string& s) {
    if (s == "none") return Ablation::none;
    if (s == "no_gyro") return Ablation::no_gyro;
    if (s == "no_ricci") return Ablation::no_ricci;
    if (s == "no_feature") return Ablation::no_feature;
    throw std::runtime_error("unknown ablation: " + s);
}

const char* ablation_text(Ablation a) {
    switch (a) {
        case Ablation::none: return "none";
        case Ablation::no_gyro: return "no_gyro";
        case Ablation::no_ricci: return "no_ricci";
        case Ablation::no_feature: return "no_feature";
    }
    return "none";
}

}  // namespace

TrainConfig TrainConfig::from_text(const std::string& text) {
    TrainConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("config line needs key = value: " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "beta") cfg.beta = std::stod(value);
        else if (key == "alpha") cfg.alpha = std::stod(value);
        else if (key == "epochs") cfg.epochs = std::stoi(value);
        else if (key == "lr_euclidean") cfg.lr_euclidean = std::stod(value);
        else if (key == "lr_riemannian") cfg.lr_riemannian = std::stod(value);
        else if (key == "tau") cfg.tau = std::stod(value);
        else if (key == "fermi_r") cfg.fermi_r = std::stod(value);
        else if (key == "fermi_s") cfg.fermi_s = std::stod(value);
        else if (key == "neg_per_pos") cfg.neg_per_pos = std::stoi(value);
        else if (key == "factors") cfg.factors = parse_factors(value);
        else if (key == "map_dim") cfg.map_dim = std::stoi(value);
        else if (key == "gcn_hidden") cfg.gcn_hidden = std::stoi(value);
        else if (key == "gcn_out") cfg.gcn_out = std::stoi(value);
        else if (key == "head_dim") cfg.head_dim = std::stoi(value);
        else if (key == "final_samples") cfg.final_samples = std::stoi(value);
        else if (key == "export_threshold") cfg.export_threshold = std::stod(value);
        else if (key == "normalize_features") cfg.normalize_features = value == "true" || value == "1";
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "ablation") cfg.ablation = parse_ablation(value);
        else if (key == "log_every") cfg.log_every = std::stoi(value);
        else throw std::runtime_error("unknown config key: " + key);
    }
    if (cfg.beta < 0.0 || cfg.beta > 1.0) throw std::runtime_error("beta must lie in [0,1]");
    if (cfg.lr_euclidean <= 0.0 || cfg.lr_riemannian <= 0.0)
        throw std::runtime_error("learning rates must be positive");
    return cfg;
}

TrainConfig TrainConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

std::string TrainConfig::to_text() const {
    std::ostringstream ss;
    ss << "beta = " << beta << "\n"
       << "alpha = " << alpha << "\n"
       << "epochs = " << epochs << "\n"
       << "lr_euclidean = " << lr_euclidean << "\n"
       << "lr_riemannian = " << lr_riemannian << "\n"
       << "tau = " << tau << "\n"
       << "fermi_r = " << fermi_r << "\n"
       << "fermi_s = " << fermi_s << "\n"
       << "neg_per_pos = " << neg_per_pos << "\n"
       << "factors = " << factors_text(factors) << "\n"
       << "map_dim = " << map_dim << "\n"
       << "gcn_hidden = " << gcn_hidden << "\n"
       << "gcn_out = " << gcn_out << "\n"
       << "head_dim = " << head_dim << "\n"
       << "final_samples = " << final_samples << "\n"
       << "export_threshold = " << export_threshold << "\n"
       << "normalize_features = " << (normalize_features ? "true" : "false") << "\n"
       << "seed = " << seed << "\n"
       << "ablation = " << ablation_text(ablation) << "\n";
    return ss.str();
}

// ---------------- optimizers ----------------

void Adam::attach(const std::vector<Tensor>& ps) {
    for (const auto& p : ps) {
        params.push_back(p);
        m.push_back(Matrix::Zero(p.rows(), p.cols()));
        v.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
}

void Adam::step() {
    ++t;
    double bc1 = 1.0 - std::pow(beta1, t);
    double bc2 = 1.0 - std::pow(beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto node = params[k].node();
        if (!node->grad_ready) continue;  // parameter unused this step
        const Matrix& g = node->grad;
        m[k] = beta1 * m[k] + (1.0 - beta1) * g;
        v[k] = beta2 * v[k] + (1.0 - beta2) * g.cwiseProduct(g);
        Matrix mhat = m[k] / bc1;
        Matrix vhat = v[k] / bc2;
        node->value -= lr * mhat.cwiseQuotient(vhat.cwiseSqrt().array().matrix() +
                                               Matrix::Constant(g.rows(), g.cols(), eps));
    }
}

namespace {
// Ball projection for kappa < 0, plus a radius cap for kappa > 0 that keeps
// the signed-distance denominator 1 + <w,x> away from its pole.
Eigen::VectorXd clamp_to_domain(Eigen::VectorXd x, double kappa) {
    x = project_to_ball(x, kappa);
    if (kappa > 0.0) {
        double cap = 0.95 / std::sqrt(kappa);
        double n = x.norm();
        if (n > cap) x *= cap / n;
    }
    return x;
}
}  // namespace

Eigen::VectorXd riemannian_update(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                                  double kappa, double lr, RiemannianAdamPointState& state,
                                  double beta1, double beta2, double eps) {
    if (state.m.size() != x.size()) {
        state.m = Eigen::VectorXd::Zero(x.size());
        state.v = Eigen::VectorXd::Zero(x.size());
        state.t = 0;
    }
    Eigen::VectorXd rg = egrad_to_rgrad(x, grad, kappa);
    ++state.t;
    state.m = beta1 * state.m + (1.0 - beta1) * rg;
    state.v = beta2 * state.v + (1.0 - beta2) * rg.cwiseProduct(rg);
    Eigen::VectorXd mhat = state.m / (1.0 - std::pow(beta1, state.t));
    Eigen::VectorXd vhat = state.v / (1.0 - std::pow(beta2, state.t));
    Eigen::VectorXd step =
        -lr * mhat.cwiseQuotient(vhat.cwiseSqrt() + Eigen::VectorXd::Constant(x.size(), eps));
    return clamp_to_domain(gyro_add(x, step, kappa), kappa);
}

void RiemannianAdam::attach(const std::vector<Tensor>& ps, const std::vector<double>& ks) {
    for (std::size_t k = 0; k < ps.size(); ++k) {
        params.push_back(ps[k]);
        kappas.push_back(ks[k]);
        m.push_back(Matrix::Zero(ps[k].rows(), ps[k].cols()));
        v.push_back(Matrix::Zero(ps[k].rows(), ps[k].cols()));
    }
}

void RiemannianAdam::step() {
    ++t;
    double bc1 = 1.0 - std::pow(beta1, t);
    double bc2 = 1.0 - std::pow(beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto node = params[k].node();
        if (!node->grad_ready) continue;
        double kappa = kappas[k];
        for (Eigen::Index r = 0; r < node->value.rows(); ++r) {
            Eigen::VectorXd x = node->value.row(r).transpose();
            Eigen::VectorXd rg =
                egrad_to_rgrad(x, node->grad.row(r).transpose(), kappa);
            m[k].row(r) = beta1 * m[k].row(r) + (1.0 - beta1) * rg.transpose();
            v[k].row(r) =
                beta2 * v[k].row(r) + (1.0 - beta2) * rg.cwiseProduct(rg).transpose();
            Eigen::VectorXd mhat = m[k].row(r).transpose() / bc1;
            Eigen::VectorXd vhat = v[k].row(r).transpose() / bc2;
            Eigen::VectorXd step = -lr * mhat.cwiseQuotient(
                                             vhat.cwiseSqrt() +
                                             Eigen::VectorXd::Constant(x.size(), eps));
            node->value.row(r) = clamp_to_domain(gyro_add(x, step, kappa), kappa).transpose();
        }
    }
}

// ---------------- model ----------------

std::vector<Tensor> ModelState::mapped_views() const {
    std::vector<Tensor> views;
    views.push_back(Tensor::constant(euclid_mapped));
    for (std::size_t m = 0; m < factor_features.size(); ++m) {
        if (ablation == Ablation::no_gyro)
            views.push_back(log_map_zero_record(factor_features[m], manifold.factors[m].kappa));
        else
            views.push_back(apply_map_record(factor_maps[m], factor_features[m]));
    }
    return views;
}

namespace {

Matrix preprocess_features(const Graph& g, bool normalize) {
    Matrix x;
    if (g.has_features()) {
        x = g.features;
    } else {
        x = Matrix::Identity(g.n, g.n);  // featureless graphs: one-hot ids
    }
    if (normalize) {
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            double s = x.row(r).cwiseAbs().sum();
            if (s > 0.0) x.row(r) /= s;
        }
    }
    return x;
}

Matrix init_ball_uniform(int n, int dim, double kappa, Rng& rng) {
    double radius = 0.1 / std::sqrt(std::abs(kappa));
    Matrix x(n, dim);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd dir(dim);
        do {
            for (int c = 0; c < dim; ++c) dir(c) = rng.normal();
        } while (dir.norm() < 1e-12);
        dir.normalize();
        double r = radius * std::pow(rng.uniform(), 1.0 / dim);
        x.row(i) = (r * dir).transpose();
    }
    return x;
}

Matrix glorot_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = rng.uniform(-limit, limit);
    return w;
}

}  // namespace

Eigen::MatrixXd refined_features(const ModelState& state) {
    if (state.ablation == Ablation::no_feature) return state.raw_features;
    std::vector<Matrix> blocks{state.raw_features};
    for (std::size_t m = 0; m < state.factor_features.size(); ++m) {
        const Matrix& coords = state.factor_features[m].value();
        if (state.ablation == Ablation::no_gyro) {
            Matrix block(coords.rows(), coords.cols());
            for (Eigen::Index r = 0; r < coords.rows(); ++r)
                block.row(r) =
                    log_map_zero(coords.row(r).transpose(), state.manifold.factors[m].kappa)
                        .transpose();
            blocks.push_back(std::move(block));
        } else {
            blocks.push_back(apply_map_rows(state.factor_maps[m], coords));
        }
    }
    Eigen::Index cols = 0;
    for (const auto& b : blocks) cols += b.cols();
    Matrix out(state.raw_features.rows(), cols);
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
        out.middleCols(off, b.cols()) = b;
        off += b.cols();
    }
    return out;
}

TrainResult train(const Graph& g_in, const TrainConfig& cfg) {
    TrainResult result;
    Graph g = largest_component(g_in, &result.input_was_disconnected);
    if (result.input_was_disconnected)
        std::cerr << "train: input disconnected, using largest component (" << g.n << " of "
                  << g_in.n << " nodes)\n";
    if (g.n < 2) throw std::runtime_error("train: graph too small");

    Rng rng(cfg.seed);
    ModelState& state = result.state;
    state.ablation = cfg.ablation;
    state.manifold.factors = cfg.factors;
    state.manifold.validate();
    state.raw_features = preprocess_features(g, cfg.normalize_features);
    const int n = g.n;
    const int f_dim = static_cast<int>(state.raw_features.cols());
    state.manifold.euclidean_dim = f_dim;

    // Frozen feature maps; the Euclidean view keeps m = F plane waves.
    state.euclid_map = sample_feature_map(0.0, f_dim, f_dim, rng.fork(101).seed());
    for (std::size_t m = 0; m < cfg.factors.size(); ++m)
        state.factor_maps.push_back(sample_feature_map(cfg.factors[m].kappa, cfg.factors[m].dim,
                                                       cfg.map_dim,
                                                       rng.fork(201 + m).seed()));
    state.euclid_mapped = apply_map_rows(state.euclid_map, state.raw_features);

    // Learnable blocks.
    for (std::size_t m = 0; m < cfg.factors.size(); ++m) {
        Rng init_rng = rng.fork(301 + m);
        state.factor_features.push_back(
            Tensor::param(init_ball_uniform(n, cfg.factors[m].dim, cfg.factors[m].kappa, init_rng)));
    }
    const int views_count = static_cast<int>(cfg.factors.size()) + 1;
    {
        Rng head_rng = rng.fork(400);
        std::vector<int> in_dims{f_dim};
        for (std::size_t m = 0; m < cfg.factors.size(); ++m)
            in_dims.push_back(cfg.ablation == Ablation::no_gyro ? cfg.factors[m].dim : cfg.map_dim);
        for (int vdim : in_dims)
            state.heads.proj.push_back(Tensor::param(glorot_matrix(vdim, cfg.head_dim, head_rng)));
    }
    {
        Rng aff_rng = rng.fork(500);
        for (std::size_t m = 0; m < cfg.factors.size(); ++m) {
            Matrix w(1, cfg.factors[m].dim);
            for (int c = 0; c < cfg.factors[m].dim; ++c)
                w(0, c) = aff_rng.normal(0.0, 1.0 / std::sqrt(cfg.factors[m].dim));
            state.affine_weights.push_back(Tensor::param(std::move(w)));
            state.affine_biases.push_back(Tensor::param(Matrix::Zero(1, 1)));
        }
        Matrix we(f_dim, 1);
        for (int c = 0; c < f_dim; ++c) we(c, 0) = aff_rng.normal(0.0, 1.0 / std::sqrt(f_dim));
        state.affine_w_e = Tensor::param(std::move(we));
        state.affine_b_e = Tensor::param(Matrix::Zero(1, 1));
    }
    {
        Rng gcn_rng = rng.fork(600);
        std::vector<int> in_dims{f_dim};
        for (std::size_t m = 0; m < cfg.factors.size(); ++m)
            in_dims.push_back(cfg.ablation == Ablation::no_gyro ? cfg.factors[m].dim : cfg.map_dim);
        for (int vdim : in_dims)
            state.gcn.push_back(GcnParams::glorot(vdim, cfg.gcn_hidden, cfg.gcn_out, gcn_rng));
    }

    // Optimizers: Euclidean params by Adam, ball-constrained blocks by
    // Riemannian Adam.
    Adam adam;
    adam.lr = cfg.lr_euclidean;
    {
        std::vector<Tensor> ps = state.heads.proj;
        for (auto& w : state.affine_weights) ps.push_back(w);
        ps.push_back(state.affine_w_e);
        ps.push_back(state.affine_b_e);
        for (auto& gc : state.gcn)
            for (auto& p : gc.params()) ps.push_back(p);
        adam.attach(ps);
    }
    RiemannianAdam radam;
    radam.lr = cfg.lr_riemannian;
    {
        std::vector<Tensor> ps = state.factor_features;
        std::vector<double> ks;
        for (const auto& f : cfg.factors) ks.push_back(f.kappa);
        for (std::size_t m = 0; m < cfg.factors.size(); ++m) {
            ps.push_back(state.affine_biases[m]);
            ks.push_back(cfg.factors[m].kappa);
        }
        radam.attach(ps, ks);
    }

    std::vector<double> kappas;
    for (const auto& f : cfg.factors) kappas.push_back(f.kappa);
    Tensor euclid_const = Tensor::constant(state.raw_features);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng epoch_rng = rng.fork(1000 + epoch);
        auto views_in = state.mapped_views();
        Tensor pi = pairwise_similarity(views_in, state.heads);
        Tensor a_star = sample_adjacency(pi, cfg.tau, epoch_rng);

        Tensor s = affine_scalars_record(state.factor_features, kappas, state.affine_weights,
                                         state.affine_biases, euclid_const, state.affine_w_e,
                                         state.affine_b_e);
        PairSample pairs = sample_structure_pairs(g.adjacency, cfg.neg_per_pos, epoch_rng);
        Tensor l_struct =
            structure_loss_pairs(a_star, s, cfg.alpha, cfg.fermi_r, cfg.fermi_s, pairs);

        Tensor norm_adj = ad::gcn_norm_adj(a_star);
        std::vector<Tensor> views;
        for (int v = 0; v < views_count; ++v)
            views.push_back(gcn_forward(norm_adj, views_in[v], state.gcn[v]));
        Tensor l_feat = feature_loss(views);

        Tensor total = ad::add(ad::scale(l_struct, cfg.beta), ad::scale(l_feat, 1.0 - cfg.beta));
        LossRecord rec{total.scalar(), l_struct.scalar(), l_feat.scalar()};
        if (!std::isfinite(rec.total))
            throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                     " (struct=" + std::to_string(rec.structure) +
                                     ", feature=" + std::to_string(rec.feature) + ")");
        result.history.push_back(rec);
        if (cfg.log_every > 0 && epoch % cfg.log_every == 0)
            std::cerr << "epoch " << epoch << " total " << rec.total << " struct " << rec.structure
                      << " feat " << rec.feature << "\n";

        ad::backward(total);
        adam.step();
        radam.step();
    }

    // Freeze the refined graph: mean of final_samples relaxed draws at tau/4.
    {
        auto views_in = state.mapped_views();
        Tensor pi = pairwise_similarity(views_in, state.heads);
        Matrix a_mean = Matrix::Zero(n, n);
        for (int k = 0; k < cfg.final_samples; ++k) {
            Rng sample_rng = rng.fork(900000 + k);
            Tensor a = sample_adjacency(pi, cfg.tau / 4.0, sample_rng);
            a_mean += a.value();
        }
        a_mean /= static_cast<double>(cfg.final_samples);
        a_mean = ((a_mean + a_mean.transpose()) / 2.0).eval();
        a_mean.diagonal().setZero();
        result.refined.a_star = a_mean;

        Tensor norm_adj = ad::gcn_norm_adj(Tensor::constant(a_mean));
        for (int v = 0; v < views_count; ++v)
            result.refined.views.push_back(
                gcn_forward(norm_adj, views_in[v], state.gcn[v]).value());
        result.refined.x_star = refined_features(state);
    }
    return result;
}

}  // namespace ricci
