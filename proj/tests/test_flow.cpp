#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ricci/flow.hpp"

using namespace ricci;
using Eigen::MatrixXd;

namespace {
Graph complete_graph(int n) {
    Graph g;
    g.n = n;
    g.adjacency = MatrixXd::Ones(n, n) - MatrixXd::Identity(n, n);
    return g;
}

RicciMatrix constant_ricci(int n, double value, const Graph& g) {
    RicciMatrix r;
    r.values = MatrixXd::Constant(n, n, value);
    r.present.setConstant(n, n, 1);
    r.kind = RicciKind::exact;
    (void)g;
    return r;
}
}  // namespace

TEST_CASE("flow step euler updates") {
    Graph g = complete_graph(2);
    SUBCASE("zero curvature leaves weights") {
        auto ric = constant_ricci(2, 0.0, g);
        Graph out = flow_step(g, ric, 0.1, FlowDirection::forward);
        CHECK(out.adjacency(0, 1) == doctest::Approx(1.0));
    }
    SUBCASE("forward shrinks positive curvature") {
        auto ric = constant_ricci(2, 0.75, g);
        Graph out = flow_step(g, ric, 0.1, FlowDirection::forward);
        CHECK(out.adjacency(0, 1) == doctest::Approx(0.925));
    }
    SUBCASE("backward grows positive curvature") {
        auto ric = constant_ricci(2, 0.75, g);
        Graph out = flow_step(g, ric, 0.1, FlowDirection::backward);
        CHECK(out.adjacency(0, 1) == doctest::Approx(1.075));
    }
    SUBCASE("stability guard") {
        auto ric = constant_ricci(2, 0.75, g);
        CHECK_THROWS(flow_step(g, ric, 2.0, FlowDirection::forward));
    }
}

TEST_CASE("backward then forward with frozen curvature is second order") {
    Graph g = make_barbell(4);
    auto ric = weighted_ollivier_edges(g, 0.5);
    double dt = 0.05;
    Graph back = flow_step(g, ric, dt, FlowDirection::backward);
    Graph round = flow_step(back, ric, dt, FlowDirection::forward);
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.adjacency(i, j) > 0.0) {
                double r = ric.at(i, j) * dt;
                CHECK(std::abs(round.adjacency(i, j) - g.adjacency(i, j)) <=
                      r * r * g.adjacency(i, j) + 1e-12);
            }
}

TEST_CASE("weighted curvature agrees with the unweighted oracle on unit lengths") {
    Graph g = make_barbell(5);
    auto weighted = weighted_ollivier_edges(g, 0.5);
    auto plain = ricci_matrix_exact(g, 0.5, PairSelection::edges_only);
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.adjacency(i, j) > 0.0)
                CHECK(weighted.at(i, j) == doctest::Approx(plain.at(i, j)).epsilon(1e-9));
}

TEST_CASE("run_flow basics") {
    SUBCASE("zero steps keeps only the input snapshot") {
        auto traj = run_flow(make_barbell(4), 0, 0.05, FlowDirection::forward, 0.5);
        CHECK(traj.snapshots.size() == 1);
        CHECK(traj.snapshots[0].step == 0);
    }
    SUBCASE("barbell bridge stretches under forward flow") {
        Graph g = make_barbell(5);
        auto traj = run_flow(g, 20, 0.05, FlowDirection::forward, 0.5);
        int k = 5;
        double prev = traj.snapshots[0].graph.adjacency(k - 1, k);
        for (std::size_t s = 1; s < traj.snapshots.size(); ++s) {
            double cur = traj.snapshots[s].graph.adjacency(k - 1, k);
            CHECK(cur > prev);
            prev = cur;
        }
    }
    SUBCASE("K5 shrinks uniformly under forward flow") {
        Graph g = complete_graph(5);
        auto traj = run_flow(g, 10, 0.05, FlowDirection::forward, 0.5);
        const Graph& last = traj.snapshots.back().graph;
        double first = last.adjacency(0, 1);
        CHECK(first < 1.0);
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j)
                CHECK(last.adjacency(i, j) == doctest::Approx(first).epsilon(1e-9));
    }
    SUBCASE("guards") {
        CHECK_THROWS(run_flow(make_sbm({10, 10}, 1.0, 0.0, 1), 1, 0.05, FlowDirection::forward, 0.5));
    }
}

TEST_CASE("karate flow moves the spectral gap in the spec direction") {
    Graph g = make_karate();
    auto backward = run_flow(g, 15, 0.05, FlowDirection::backward, 0.5);
    CHECK(backward.snapshots.back().spectral_gap >= backward.snapshots.front().spectral_gap);
    auto forward = run_flow(g, 15, 0.05, FlowDirection::forward, 0.5);
    CHECK(forward.snapshots.back().spectral_gap <= forward.snapshots.front().spectral_gap);
}

TEST_CASE("surgery") {
    Graph g = make_barbell(5);
    SUBCASE("infinite threshold is identity") {
        bool disc = false;
        Graph out = surgery(g, 1e18, std::nullopt, &disc);
        CHECK((out.adjacency - g.adjacency).norm() == 0.0);
        CHECK_FALSE(disc);
    }
    SUBCASE("removing the long bridge disconnects") {
        Graph stretched = g;
        stretched.adjacency(4, 5) = stretched.adjacency(5, 4) = 3.0;
        bool disc = false;
        Graph out = surgery(stretched, 2.0, std::nullopt, &disc);
        CHECK(disc);
        CHECK(out.adjacency(4, 5) == 0.0);
    }
    SUBCASE("add_below inserts two-hop shortcuts") {
        Graph p;
        p.n = 3;
        p.adjacency = MatrixXd::Zero(3, 3);
        p.adjacency(0, 1) = p.adjacency(1, 0) = 0.1;
        p.adjacency(1, 2) = p.adjacency(2, 1) = 0.1;
        bool disc = false;
        Graph out = surgery(p, 1e18, 0.5, &disc);
        CHECK(out.adjacency(0, 2) == doctest::Approx(0.5));
        Graph none = surgery(p, 1e18, 0.0, &disc);
        CHECK(none.adjacency(0, 2) == 0.0);
    }
}
