#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>

#include "ricci/rng.hpp"
#include "ricci/transport.hpp"

using namespace ricci;

namespace {

// Checks the full optimality certificate: marginals, dual feasibility, and
// primal == dual (weak duality makes that a proof of optimality).
void check_certificate(const MassDistribution& p, const MassDistribution& q,
                       const GroundDistance& ground, const TransportPlan& plan, double tol) {
    std::vector<double> out_mass(p.support.size(), 0.0), in_mass(q.support.size(), 0.0);
    for (const auto& e : plan.entries) {
        CHECK(e.mass >= 0.0);
        for (std::size_t a = 0; a < p.support.size(); ++a)
            if (p.support[a].first == e.src) out_mass[a] += e.mass;
        for (std::size_t b = 0; b < q.support.size(); ++b)
            if (q.support[b].first == e.dst) in_mass[b] += e.mass;
    }
    for (std::size_t a = 0; a < p.support.size(); ++a)
        CHECK(std::abs(out_mass[a] - p.support[a].second) <= 1e-9);
    for (std::size_t b = 0; b < q.support.size(); ++b)
        CHECK(std::abs(in_mass[b] - q.support[b].second) <= 1e-9);
    for (std::size_t a = 0; a < p.support.size(); ++a)
        for (std::size_t b = 0; b < q.support.size(); ++b)
            CHECK(plan.u_potential[a] + plan.v_potential[b] <=
                  ground(p.support[a].first, q.support[b].first) + tol);
    CHECK(std::abs(plan.cost - plan.dual_cost) <= tol);
}

}  // namespace

TEST_CASE("identical distributions cost zero") {
    MassDistribution p;
    p.support = {{0, 0.5}, {1, 0.5}};
    auto ground = [](int a, int b) { return a == b ? 0.0 : 1.0; };
    auto plan = wasserstein(p, p, ground);
    CHECK(plan.cost == doctest::Approx(0.0));
}

TEST_CASE("point masses move the full distance") {
    MassDistribution p, q;
    p.support = {{3, 1.0}};
    q.support = {{7, 1.0}};
    auto plan = wasserstein(p, q, [](int, int) { return 2.5; });
    CHECK(plan.cost == doctest::Approx(2.5));
    CHECK(plan.entries.size() == 1);
}

TEST_CASE("two-by-two instance with known optimum") {
    // supplies {a=0:0.25, b=1:0.25, filler 4:0.5}, demands {c=2:0.25, d=3:0.25, filler}.
    // Spec sub-instance: a-c=1, a-d=2, b-c=2, b-d=3; both matchings cost 1.0.
    MassDistribution p, q;
    p.support = {{0, 0.25}, {1, 0.25}, {4, 0.5}};
    q.support = {{2, 0.25}, {3, 0.25}, {4, 0.5}};
    auto ground = [](int a, int b) -> double {
        if (a == b) return 0.0;
        if (a == 4 || b == 4) return 10.0;  // filler stays put
        if (a == 0 && b == 2) return 1.0;
        if (a == 0 && b == 3) return 2.0;
        if (a == 1 && b == 2) return 2.0;
        if (a == 1 && b == 3) return 3.0;
        return 10.0;
    };
    auto plan = wasserstein(p, q, ground);
    CHECK(plan.cost == doctest::Approx(1.0));
    check_certificate(p, q, ground, plan, 1e-9);
}

TEST_CASE("validation") {
    MassDistribution bad;
    bad.support = {{0, 0.7}};
    CHECK_THROWS(bad.validate());
    bad.support = {{0, -0.1}, {1, 1.1}};
    CHECK_THROWS(bad.validate());
}

TEST_CASE("random instances satisfy the optimality certificate") {
    Rng rng(2024);
    for (int trial = 0; trial < 120; ++trial) {
        int ns = static_cast<int>(rng.integer(1, 6));
        int nt = static_cast<int>(rng.integer(1, 6));
        auto make = [&](int count, int offset) {
            MassDistribution m;
            double total = 0.0;
            std::vector<double> w(count);
            for (int i = 0; i < count; ++i) {
                w[i] = rng.uniform(0.05, 1.0);
                total += w[i];
            }
            for (int i = 0; i < count; ++i) m.support.push_back({offset + i, w[i] / total});
            return m;
        };
        MassDistribution p = make(ns, 0), q = make(nt, 100);
        Eigen::MatrixXd c(ns, nt);
        for (int a = 0; a < ns; ++a)
            for (int b = 0; b < nt; ++b) c(a, b) = rng.uniform(0.0, 5.0);
        auto ground = [&](int a, int b) { return c(a, b - 100); };
        auto plan = wasserstein(p, q, ground);
        check_certificate(p, q, ground, plan, 1e-9);
    }
}

TEST_CASE("cost invariant under support relabeling") {
    Rng rng(99);
    MassDistribution p, q;
    p.support = {{0, 0.2}, {1, 0.3}, {2, 0.5}};
    q.support = {{10, 0.6}, {11, 0.4}};
    Eigen::MatrixXd c(3, 2);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 2; ++b) c(a, b) = rng.uniform(0.0, 3.0);
    auto ground = [&](int a, int b) { return c(a, b - 10); };
    auto base = wasserstein(p, q, ground);

    MassDistribution p2;
    p2.support = {{2, 0.5}, {0, 0.2}, {1, 0.3}};
    auto plan2 = wasserstein(p2, q, ground);
    CHECK(plan2.cost == doctest::Approx(base.cost).epsilon(1e-12));
}
