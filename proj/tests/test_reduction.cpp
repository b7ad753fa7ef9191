#include "doctest.h"

#include <random>

#include "vibrokit/reduction.hpp"
#include "vibrokit/simulate.hpp"

#include "helpers.hpp"

using namespace vibrokit;

namespace {

struct Built {
    OscillatorNetwork net;
    ClusterPartition part;
    IncidenceReduction red;
    ReductionMatrices rm;
};

Built build(std::uint64_t seed) {
    auto rnd = testing::random_clustered_network(seed);
    auto red = build_reduction(rnd.net, rnd.part);
    auto rm = compute_R(red);
    return {rnd.net, rnd.part, red, rm};
}

}  // namespace

TEST_CASE("a tree network reduces with R = I") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
    w(0, 1) = w(1, 0) = 1.0;
    w(1, 2) = w(2, 1) = 1.0;
    w(2, 3) = w(3, 2) = 1.0;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(4);
    auto red = build_reduction({w, f}, ClusterPartition{{{0, 1, 2, 3}}});
    auto rm = compute_R(red);
    CHECK((rm.R() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("triangle chord expands over the two tree edges") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
    testing::add_complete_cluster(w, {0, 1, 2}, 1.0);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(3);
    auto red = build_reduction({w, f}, ClusterPartition{{{0, 1, 2}}});
    auto rm = compute_R(red);

    Eigen::MatrixXd expect(3, 2);
    expect << 1, 0, 0, 1, 1, 1;
    CHECK((rm.R1 - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identity B^T = R B_hat^T holds on random clustered networks") {
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
        auto b = build(seed);
        double residual =
            (b.red.B().transpose() - b.rm.R() * b.red.B_hat().transpose()).cwiseAbs().maxCoeff();
        CHECK(residual <= 1e-10);

        // R1 rows for tree edges are an identity pattern
        for (int k = 0; k < b.red.r; ++k) {
            const int nk = b.red.cluster_sizes[k];
            Eigen::MatrixXd top = b.rm.R1.block(b.red.intra_col_offset[k], b.red.tree_col_offset[k],
                                                nk - 1, nk - 1);
            CHECK((top - Eigen::MatrixXd::Identity(nk - 1, nk - 1)).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("reduced state of a clustered phase vector") {
    auto b = build(42);
    const int n = b.net.size();

    SUBCASE("equal phases per cluster give x = 0") {
        Eigen::VectorXd theta(n);
        for (int k = 0; k < b.part.num_clusters(); ++k) {
            for (int v : b.part.clusters[k]) theta(v) = 0.3 * (k + 1);
        }
        auto s = reduce_state(b.red, theta);
        CHECK(s.x.cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("wrapping is presentation-only") {
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
        theta(b.part.clusters[0][0]) = 7.0;  // beyond pi
        auto s = reduce_state(b.red, theta);
        auto w = s.wrapped();
        bool any_big = s.x.cwiseAbs().maxCoeff() > kPi;
        CHECK(any_big);  // raw values stay unwrapped
        CHECK(w.x.cwiseAbs().maxCoeff() <= kPi);
        CHECK(w.y.cwiseAbs().maxCoeff() <= kPi);
    }
    SUBCASE("zero state maps to zero") {
        auto s = reduce_state(b.red, Eigen::VectorXd::Zero(n));
        CHECK(s.x.cwiseAbs().maxCoeff() == 0.0);
        CHECK(s.y.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("x matches direct per-edge subtraction") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> dist(-2.0, 2.0);
        Eigen::VectorXd theta(n);
        for (int i = 0; i < n; ++i) theta(i) = dist(rng);
        auto s = reduce_state(b.red, theta);
        int col = 0;
        for (const auto& e : b.red.intra_edges) {
            if (!e.in_tree) continue;
            CHECK(s.x(col) == doctest::Approx(theta(e.head) - theta(e.tail)).epsilon(1e-14));
            ++col;
        }
    }
}

TEST_CASE("lift_error is the max wrapped pairwise gap per cluster") {
    ClusterPartition part{{{0, 1, 2}}};
    Eigen::VectorXd theta(3);
    theta << 0.0, 0.1, 6.28318530717958647692 + 0.05;  // wraps to ~0.05
    Eigen::VectorXd e = lift_error(theta, part);
    CHECK(e(0) == doctest::Approx(0.1).epsilon(1e-10));
}

TEST_CASE("vector field zero properties") {
    auto b = build(17);
    ReducedDynamics dyn(b.red, b.rm, b.net);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);

    CHECK(dyn.f_intra(Eigen::VectorXd::Zero(dyn.x_dim())).cwiseAbs().maxCoeff() < 1e-14);

    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd y(dyn.y_dim());
        for (int i = 0; i < y.size(); ++i) y(i) = dist(rng);
        CHECK(dyn.f_inter(Eigen::VectorXd::Zero(dyn.x_dim()), y).cwiseAbs().maxCoeff() < 1e-12);
    }
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd x(dyn.x_dim());
        for (int i = 0; i < x.size(); ++i) x(i) = dist(rng);
        CHECK(dyn.f_ctr(Eigen::VectorXd::Zero(dyn.directed_count()), x).cwiseAbs().maxCoeff() <
              1e-14);
        Eigen::VectorXd u(dyn.directed_count());
        for (int i = 0; i < u.size(); ++i) u(i) = dist(rng);
        CHECK(dyn.f_ctr(u, Eigen::VectorXd::Zero(dyn.x_dim())).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("f_inter(0, y) = 0 fails once the row-sum condition is broken") {
    auto rnd = testing::random_clustered_network(23);
    // strengthen one single inter edge: row sums now differ
    rnd.net.weights(rnd.part.clusters[0][0], rnd.part.clusters[1][0]) += 0.9;
    rnd.net.weights(rnd.part.clusters[1][0], rnd.part.clusters[0][0]) += 0.9;
    REQUIRE_FALSE(validate_invariance(rnd.net, rnd.part).passed());

    auto red = build_reduction(rnd.net, rnd.part);
    auto rm = compute_R(red);
    ReducedDynamics dyn(red, rm, rnd.net);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd y(dyn.y_dim());
        for (int i = 0; i < y.size(); ++i) y(i) = dist(rng);
        worst = std::max(worst,
                         dyn.f_inter(Eigen::VectorXd::Zero(dyn.x_dim()), y).cwiseAbs().maxCoeff());
    }
    CHECK(worst > 1e-3);
}

TEST_CASE("time derivative of reduced coordinates matches the compact fields") {
    auto b = build(31);
    ReducedDynamics dyn(b.red, b.rm, b.net);

    VibrationSchedule sched;
    sched.epsilon = 0.5;
    // dither on the first tree edge of cluster 1
    const auto& e = b.red.intra_edges[0];
    sched.amplitudes[{e.head, e.tail}] = 0.4;
    sched.amplitudes[{e.tail, e.head}] = -0.4;

    Eigen::VectorXd theta0 = default_initial_state(b.net, b.part, 7, 0.3);
    const double dt = 1e-4;
    auto traj = simulate_full(b.net, b.part, sched, theta0, 2.0, dt);
    const Eigen::VectorXd amps = directed_amplitudes(b.red, sched);

    for (int s = 1; s + 1 < traj.samples(); s += 500) {
        auto prev = reduce_state(b.red, traj.states.row(s - 1).transpose());
        auto cur = reduce_state(b.red, traj.states.row(s).transpose());
        auto next = reduce_state(b.red, traj.states.row(s + 1).transpose());
        Eigen::VectorXd xdot_fd = (next.x - prev.x) / (2.0 * dt);

        const double t = traj.times(s);
        Eigen::VectorXd sample = amps * std::sin(t / sched.epsilon);
        Eigen::VectorXd xdot = dyn.f_intra(cur.x) + dyn.f_inter(cur.x, cur.y) +
                               dyn.f_ctr(sample, cur.x) / sched.epsilon;
        // central difference is O(dt^2) with the third derivative of order
        // 1/eps^3 from the dither
        const double tol = 10.0 * dt * dt / (sched.epsilon * sched.epsilon * sched.epsilon);
        CHECK((xdot_fd - xdot).cwiseAbs().maxCoeff() < tol);

        Eigen::VectorXd ydot_fd = (next.y - prev.y) / (2.0 * dt);
        Eigen::VectorXd ydot = dyn.g(cur.x, cur.y) + dyn.g_ctr(sample, cur.x) / sched.epsilon;
        CHECK((ydot_fd - ydot).cwiseAbs().maxCoeff() < tol);
    }
}
