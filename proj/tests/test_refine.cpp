#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ricci/refine.hpp"

using namespace ricci;
using ad::Matrix;
using ad::Tensor;

namespace {
Graph complete_graph(int n) {
    Graph g;
    g.n = n;
    g.adjacency = Matrix::Ones(n, n) - Matrix::Identity(n, n);
    return g;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal(0.0, scale);
    return m;
}
}  // namespace

TEST_CASE("pairwise similarity") {
    SUBCASE("identical features saturate at the clamp") {
        Matrix same = Matrix::Ones(3, 2);
        SimilarityHeads heads;
        heads.proj = {Tensor::constant(Matrix::Identity(2, 2))};
        Tensor pi = pairwise_similarity({Tensor::constant(same)}, heads);
        CHECK(pi.value()(0, 1) == doctest::Approx(1.0 - 1e-4));
    }
    SUBCASE("orthogonal features clamp at the floor") {
        Matrix ortho(2, 2);
        ortho << 1, 0, 0, 1;
        SimilarityHeads heads;
        heads.proj = {Tensor::constant(Matrix::Identity(2, 2))};
        Tensor pi = pairwise_similarity({Tensor::constant(ortho)}, heads);
        CHECK(pi.value()(0, 1) == doctest::Approx(1e-4));
    }
    SUBCASE("two heads average their cosines") {
        // First view: identical rows (cos 1). Second view: orthogonal rows.
        Matrix same = Matrix::Ones(2, 2);
        Matrix ortho(2, 2);
        ortho << 1, 0, 0, 1;
        SimilarityHeads heads;
        heads.proj = {Tensor::constant(Matrix::Identity(2, 2)),
                      Tensor::constant(Matrix::Identity(2, 2))};
        Tensor pi =
            pairwise_similarity({Tensor::constant(same), Tensor::constant(ortho)}, heads);
        CHECK(pi.value()(0, 1) == doctest::Approx(0.5));
    }
}

TEST_CASE("sample_adjacency expectation is monotone in pi") {
    std::vector<double> levels{0.1, 0.3, 0.5, 0.7, 0.9};
    std::vector<double> means;
    for (double level : levels) {
        Matrix pi_v = Matrix::Constant(2, 2, level);
        Rng rng(17);
        double acc = 0.0;
        const int draws = 10000;
        for (int k = 0; k < draws; ++k)
            acc += sample_adjacency(Tensor::constant(pi_v), 1.0, rng).value()(0, 1);
        means.push_back(acc / draws);
    }
    for (std::size_t i = 1; i < means.size(); ++i) CHECK(means[i] > means[i - 1]);
}

TEST_CASE("backward flow distance closed forms") {
    SUBCASE("constant potential gives zero distances") {
        Tensor a = Tensor::constant(complete_graph(4).adjacency);
        Tensor s = Tensor::constant(Matrix::Constant(4, 1, 2.5));
        Tensor d = backward_flow_distance(a, s, 0.3);
        CHECK(d.value().cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("K2 at alpha 0.2 with s=(1,0)") {
        Tensor a = Tensor::constant(complete_graph(2).adjacency);
        Matrix sv(2, 1);
        sv << 1.0, 0.0;
        Tensor d = backward_flow_distance(a, Tensor::constant(sv), 0.2);
        CHECK(d.value()(0, 1) == doctest::Approx(0.6).epsilon(1e-9));
        CHECK(d.value()(1, 0) == doctest::Approx(0.6).epsilon(1e-9));
    }
    SUBCASE("K2 at alpha 0.5 cancels") {
        Tensor a = Tensor::constant(complete_graph(2).adjacency);
        Matrix sv(2, 1);
        sv << 1.0, 0.0;
        Tensor d = backward_flow_distance(a, Tensor::constant(sv), 0.5);
        CHECK(d.value()(0, 1) <= 1e-12);
    }
}

TEST_CASE("fermi dirac") {
    Matrix dv = Matrix::Constant(1, 1, 2.0);
    CHECK(fermi_dirac(Tensor::constant(dv), 2.0, 1.0).value()(0, 0) == doctest::Approx(0.5));
    dv(0, 0) = 1e9;
    CHECK(fermi_dirac(Tensor::constant(dv), 2.0, 1.0).value()(0, 0) == doctest::Approx(0.0));
    dv(0, 0) = 1.0;  // r - s
    CHECK(fermi_dirac(Tensor::constant(dv), 2.0, 1.0).value()(0, 0) ==
          doctest::Approx(0.7310585786).epsilon(1e-9));
}

TEST_CASE("structure loss") {
    Graph g = make_barbell(3);
    SUBCASE("confident correct predictions give near-zero loss") {
        Matrix p = Matrix::Constant(g.n, g.n, 1e-12);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                if (g.adjacency(i, j) > 0.0) p(i, j) = 1.0 - 1e-12;
        Rng rng(3);
        double loss = structure_loss(g.adjacency, Tensor::constant(p), 5, rng).scalar();
        CHECK(loss <= 1e-9);
    }
    SUBCASE("uniform half predictions give log 2") {
        Matrix p = Matrix::Constant(g.n, g.n, 0.5);
        Rng rng(4);
        double loss = structure_loss(g.adjacency, Tensor::constant(p), 5, rng).scalar();
        CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    }
    SUBCASE("raising edge probabilities lowers the loss") {
        Rng rng_a(5), rng_b(5);
        Matrix p = Matrix::Constant(g.n, g.n, 0.4);
        double base = structure_loss(g.adjacency, Tensor::constant(p), 3, rng_a).scalar();
        Matrix better = p;
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                if (g.adjacency(i, j) > 0.0) better(i, j) = 0.8;
        double improved = structure_loss(g.adjacency, Tensor::constant(better), 3, rng_b).scalar();
        CHECK(improved < base);
    }
    SUBCASE("pair path agrees with the dense path") {
        Rng rng(11);
        Tensor a_star = Tensor::constant((Matrix::Ones(g.n, g.n) * 0.4).eval());
        Matrix sv = random_matrix(g.n, 1, rng, 0.5);
        Tensor s = Tensor::constant(sv);
        PairSample pairs = sample_structure_pairs(g.adjacency, 4, rng);
        double via_pairs =
            structure_loss_pairs(a_star, s, 0.5, 2.0, 1.0, pairs).scalar();

        Tensor d = backward_flow_distance(a_star, s, 0.5);
        Tensor p = fermi_dirac(d, 2.0, 1.0);
        double acc = 0.0;
        for (auto [i, j] : pairs.positives) acc += -std::log(p.value()(i, j));
        for (auto [i, j] : pairs.negatives) acc += -std::log(1.0 - p.value()(i, j));
        acc /= static_cast<double>(pairs.positives.size() + pairs.negatives.size());
        CHECK(via_pairs == doctest::Approx(acc).epsilon(1e-9));
    }
    SUBCASE("neg_per_pos zero restricts to positives") {
        Rng rng(6);
        PairSample pairs = sample_structure_pairs(g.adjacency, 0, rng);
        CHECK(pairs.negatives.empty());
        CHECK(pairs.positives.size() == static_cast<std::size_t>(make_barbell(3).num_edges()));
    }
}

TEST_CASE("structure loss gradients are exact") {
    Graph g = make_barbell(3);
    Rng rng(21);
    Matrix a0 = Matrix::Constant(g.n, g.n, 0.3) +
                random_matrix(g.n, g.n, rng, 0.05).cwiseAbs();
    a0 = ((a0 + a0.transpose()) / 2.0).eval();
    a0.diagonal().setZero();
    Tensor a_star = Tensor::param(a0);
    Tensor s = Tensor::param(random_matrix(g.n, 1, rng, 0.5));
    PairSample pairs = sample_structure_pairs(g.adjacency, 3, rng);
    auto build = [&] { return structure_loss_pairs(a_star, s, 0.5, 2.0, 1.0, pairs); };
    Rng check_rng(22);
    auto report = ad::grad_check(build, {a_star, s}, 1e-6, 20, check_rng);
    CHECK(report.all_finite);
    CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("infonce module facts") {
    SUBCASE("single row loss is zero") {
        Matrix z(1, 3);
        z << 0.2, -0.4, 1.0;
        CHECK(infonce(Tensor::constant(z), Tensor::constant(z)).scalar() == doctest::Approx(0.0));
    }
    SUBCASE("diagonal similarity closed form") {
        Matrix ident = Matrix::Identity(2, 2);
        double loss = infonce(Tensor::constant(ident), Tensor::constant(ident)).scalar();
        CHECK(loss == doctest::Approx(std::log(std::exp(1.0) + 1.0) - 1.0).epsilon(1e-9));
    }
    SUBCASE("identity alignment beats every row permutation") {
        for (int n : {3, 4, 5}) {
            Rng rng(100 + n);
            Matrix z(n, 3);
            for (int i = 0; i < n; ++i) {
                Eigen::VectorXd dir(3);
                for (int c = 0; c < 3; ++c) dir(c) = rng.normal();
                dir.normalize();
                z.row(i) = ((0.5 + 0.7 * i) * dir).transpose();  // distinct norms
            }
            double aligned = infonce(Tensor::constant(z), Tensor::constant(z)).scalar();
            std::vector<int> perm(n);
            for (int i = 0; i < n; ++i) perm[i] = i;
            do {
                bool identity = true;
                for (int i = 0; i < n; ++i) identity = identity && perm[i] == i;
                if (identity) continue;
                Matrix zp(n, 3);
                for (int i = 0; i < n; ++i) zp.row(i) = z.row(perm[i]);
                double shuffled = infonce(Tensor::constant(z), Tensor::constant(zp)).scalar();
                CHECK(shuffled >= aligned - 1e-12);
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
    }
}

TEST_CASE("feature loss combinations") {
    Rng rng(31);
    Matrix z0 = random_matrix(4, 3, rng, 0.5);
    Matrix z1 = random_matrix(4, 3, rng, 0.5);
    Matrix z2 = random_matrix(4, 3, rng, 0.5);
    Tensor t0 = Tensor::constant(z0), t1 = Tensor::constant(z1), t2 = Tensor::constant(z2);

    double two = feature_loss({t0, t1}).scalar();
    CHECK(two == doctest::Approx(infonce(t0, t1).scalar() + infonce(t1, t0).scalar()));

    double three = feature_loss({t0, t1, t2}).scalar();
    double expected = 0.5 * (infonce(t0, t1).scalar() + infonce(t1, t0).scalar() +
                             infonce(t0, t2).scalar() + infonce(t2, t0).scalar());
    CHECK(three == doctest::Approx(expected).epsilon(1e-12));

    CHECK_THROWS(feature_loss({t0}));

    // All views identical with one row: exactly zero.
    Matrix one(1, 3);
    one << 1.0, 2.0, 3.0;
    CHECK(feature_loss({Tensor::constant(one), Tensor::constant(one)}).scalar() ==
          doctest::Approx(0.0));
}
