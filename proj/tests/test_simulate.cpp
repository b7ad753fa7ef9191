#include "doctest.h"

#include <random>

#include "vibrokit/simulate.hpp"

#include "helpers.hpp"

using namespace vibrokit;

namespace {

VibrationSchedule no_control() { return {1.0, {}}; }

}  // namespace

TEST_CASE("a lone oscillator drifts at its natural frequency") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, 1);
    Eigen::VectorXd f(1);
    f << 2.0;
    Eigen::VectorXd theta0(1);
    theta0 << 0.25;
    auto traj = simulate_full({w, f}, ClusterPartition{{{0}}}, no_control(), theta0, 1.0, 1e-3);
    CHECK(traj.states(traj.samples() - 1, 0) == doctest::Approx(2.25).epsilon(1e-10));
}

TEST_CASE("coupled pair follows the scalar difference equation") {
    const double a = 0.8;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(0, 1) = w(1, 0) = a;
    Eigen::VectorXd f = Eigen::VectorXd::Constant(2, 1.3);
    Eigen::VectorXd theta0(2);
    theta0 << 0.0, 0.1;

    auto traj = simulate_full({w, f}, ClusterPartition{{{0, 1}}}, no_control(), theta0, 5.0, 1e-3);

    // high-resolution reference on the difference: d' = -2 a sin(d)
    double d = 0.1;
    const double h = 1e-4;
    auto rhs = [&](double dd) { return -2.0 * a * std::sin(dd); };
    for (int i = 0; i < 50000; ++i) {
        const double k1 = rhs(d);
        const double k2 = rhs(d + 0.5 * h * k1);
        const double k3 = rhs(d + 0.5 * h * k2);
        const double k4 = rhs(d + h * k3);
        d += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
    }
    const int last = traj.samples() - 1;
    CHECK(std::abs((traj.states(last, 1) - traj.states(last, 0)) - d) <= 1e-8);
}

TEST_CASE("zero frequencies and zero weights stay put") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
    w(0, 1) = w(1, 0) = 1e-30;  // keep the cluster formally connected
    w(1, 2) = w(2, 1) = 1e-30;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd theta0(3);
    theta0 << 0.3, -0.2, 0.9;
    auto traj = simulate_full({w, f}, ClusterPartition{{{0, 1, 2}}}, no_control(), theta0, 2.0, 1e-2);
    CHECK((traj.states.row(traj.samples() - 1).transpose() - theta0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("step size must resolve the dither") {
    auto rnd = testing::random_clustered_network(3);
    auto red = build_reduction(rnd.net, rnd.part);
    VibrationSchedule sched;
    sched.epsilon = 0.02;
    const auto& e = red.intra_edges[0];
    sched.amplitudes[{e.head, e.tail}] = 1.0;
    Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(rnd.net.size());
    CHECK_THROWS_AS(simulate_full(rnd.net, rnd.part, sched, theta0, 1.0, 0.01),
                    std::invalid_argument);
    CHECK_NOTHROW(simulate_full(rnd.net, rnd.part, sched, theta0, 0.1, 0.001));
}

TEST_CASE("manifold states stay on the manifold without control") {
    auto rnd = testing::random_clustered_network(19);
    auto red = build_reduction(rnd.net, rnd.part);
    auto rm = compute_R(red);
    ReducedDynamics dyn(red, rm, rnd.net);

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dyn.x_dim());
    Eigen::VectorXd y0(dyn.y_dim());
    for (int i = 0; i < y0.size(); ++i) y0(i) = 0.4 * (i + 1);

    const double horizon = 10.0;
    auto traj = simulate_reduced(red, dyn, no_control(), x0, y0, horizon, 1e-3);
    const Eigen::VectorXd x_end = traj.states.row(traj.samples() - 1).head(dyn.x_dim());
    CHECK(x_end.cwiseAbs().maxCoeff() < 1e-9 * horizon);
}

TEST_CASE("full and reduced integrations agree through the tree map") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        auto rnd = testing::random_clustered_network(seed);
        auto red = build_reduction(rnd.net, rnd.part);
        auto rm = compute_R(red);
        ReducedDynamics dyn(red, rm, rnd.net);

        VibrationSchedule sched;
        sched.epsilon = 0.05;
        if (seed != 1) {  // one uncontrolled case, two controlled
            for (int k = 0; k < red.r; ++k) {
                for (const auto& [key, u] : design_lower_triangular(red, k, 0.8).amplitudes) {
                    sched.amplitudes[key] = u;
                }
            }
        }

        Eigen::VectorXd theta0 = default_initial_state(rnd.net, rnd.part, seed, 0.2);
        const double dt = sched.any_nonzero() ? sched.epsilon / 25.0 : 1e-3;
        auto full = simulate_full(rnd.net, rnd.part, sched, theta0, 10.0, dt);

        auto s0 = reduce_state(red, theta0);
        auto reduced = simulate_reduced(red, dyn, sched, s0.x, s0.y, 10.0, dt);

        double worst = 0.0;
        for (int s = 0; s < full.samples(); s += 50) {
            auto rs = reduce_state(red, full.states.row(s).transpose());
            Eigen::VectorXd from_full(rs.x.size() + rs.y.size());
            from_full << rs.x, rs.y;
            worst = std::max(
                worst, (from_full - reduced.states.row(s).transpose()).cwiseAbs().maxCoeff());
        }
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("shifting every phase leaves the differences unchanged") {
    auto rnd = testing::random_clustered_network(29);
    Eigen::VectorXd theta0 = default_initial_state(rnd.net, rnd.part, 11, 0.3);
    auto a = simulate_full(rnd.net, rnd.part, no_control(), theta0, 5.0, 1e-3);
    Eigen::VectorXd shifted = theta0.array() + 1.234;
    auto b = simulate_full(rnd.net, rnd.part, no_control(), shifted, 5.0, 1e-3);

    const int last = a.samples() - 1;
    for (int i = 1; i < rnd.net.size(); ++i) {
        const double da = a.states(last, i) - a.states(last, 0);
        const double db = b.states(last, i) - b.states(last, 0);
        CHECK(std::abs(da - db) < 1e-9);
    }
}

TEST_CASE("halving dt converges at fourth order") {
    auto rnd = testing::random_clustered_network(37);
    Eigen::VectorXd theta0 = default_initial_state(rnd.net, rnd.part, 13, 0.5);
    auto run = [&](double dt) {
        auto traj = simulate_full(rnd.net, rnd.part, no_control(), theta0, 2.0, dt);
        return Eigen::VectorXd(traj.states.row(traj.samples() - 1).transpose());
    };
    Eigen::VectorXd coarse = run(0.02);
    Eigen::VectorXd mid = run(0.01);
    Eigen::VectorXd fine = run(0.005);
    const double e1 = (coarse - mid).cwiseAbs().maxCoeff();
    const double e2 = (mid - fine).cwiseAbs().maxCoeff();
    CHECK(std::log2(e1 / e2) >= 3.5);
}

TEST_CASE("verdict on constant trajectories") {
    SUBCASE("all-equal phases converge with zero error") {
        Trajectory traj;
        traj.kind = TrajectoryKind::Full;
        traj.times = Eigen::VectorXd::LinSpaced(11, 0.0, 10.0);
        traj.states = Eigen::MatrixXd::Zero(11, 4);
        auto v = verdict(traj, ClusterPartition{{{0, 1}, {2, 3}}});
        CHECK(v.converged);
        CHECK(v.terminal_error.maxCoeff() == 0.0);
        CHECK(v.tail_slope_sign == 0);
    }
    SUBCASE("uniform spread on the circle stays apart") {
        Trajectory traj;
        traj.kind = TrajectoryKind::Full;
        traj.times = Eigen::VectorXd::LinSpaced(11, 0.0, 10.0);
        traj.states.resize(11, 4);
        for (int s = 0; s < 11; ++s) {
            traj.states.row(s) << 0.0, kPi / 2.0, kPi, 3.0 * kPi / 2.0;
        }
        auto v = verdict(traj, ClusterPartition{{{0, 1, 2, 3}}});
        CHECK_FALSE(v.converged);
        CHECK(v.terminal_error(0) == doctest::Approx(kPi));
    }
}

TEST_CASE("non-finite states abort the run") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(0, 1) = w(1, 0) = 1.0;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd theta0(2);
    theta0 << 0.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(
        simulate_full({w, f}, ClusterPartition{{{0, 1}}}, no_control(), theta0, 1.0, 1e-2),
        NumericalError);
}

TEST_CASE("default initial state is seeded and reproducible") {
    auto rnd = testing::random_clustered_network(41);
    Eigen::VectorXd a = default_initial_state(rnd.net, rnd.part, 5, 0.1, {0.0, 1.0});
    Eigen::VectorXd b = default_initial_state(rnd.net, rnd.part, 5, 0.1, {0.0, 1.0});
    Eigen::VectorXd c = default_initial_state(rnd.net, rnd.part, 6, 0.1, {0.0, 1.0});
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
    for (int v : rnd.part.clusters[1]) {
        CHECK(std::abs(a(v) - 1.0) <= 0.1);
    }
}

TEST_CASE("a single complete cluster of identical oscillators synchronizes") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
    testing::add_complete_cluster(w, {0, 1, 2}, 1.0);
    Eigen::VectorXd f = Eigen::VectorXd::Constant(3, 2.0);
    OscillatorNetwork net{w, f};
    ClusterPartition part{{{0, 1, 2}}};
    Eigen::VectorXd theta0 = default_initial_state(net, part, 100, 0.4);
    auto traj = simulate_full(net, part, VibrationSchedule{1.0, {}}, theta0, 20.0, 1e-2);
    CHECK(verdict(traj, part).converged);
}
