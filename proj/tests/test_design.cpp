#include "doctest.h"

#include <random>

#include "vibrokit/design.hpp"

#include "helpers.hpp"

using namespace vibrokit;

namespace {

// three clusters: the weighted triangle whose robustness a dither can raise,
// plus two complete uniform clusters that stay put
struct Bundle {
    OscillatorNetwork net;
    ClusterPartition part;
};

Bundle triangle_plus_complete() {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(7, 7);
    w(0, 1) = w(1, 0) = 0.02;
    w(1, 2) = w(2, 1) = 0.08;
    w(0, 2) = w(2, 0) = 0.02;
    testing::add_complete_cluster(w, {3, 4, 5, 6}, 0.75);
    for (int a : {0, 1, 2}) {
        for (int b : {3, 4, 5, 6}) w(a, b) = w(b, a) = 0.05;
    }
    Eigen::VectorXd f(7);
    f << 1.0, 1.0, 1.0, 10.0, 10.0, 10.0, 10.0;
    return {OscillatorNetwork{w, f}, ClusterPartition{{{0, 1, 2}, {3, 4, 5, 6}}}};
}

}  // namespace

TEST_CASE("scanning only u = 0 reports no improvement") {
    auto b = triangle_plus_complete();
    auto result = amplitude_scan(b.net, b.part, {0}, {0.0});
    CHECK_FALSE(result.improved);
    CHECK(result.selected_u == 0.0);
    CHECK(result.schedule.amplitudes.empty());
    CHECK((result.robustness_after - result.robustness_before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("complete uniformly weighted targets cannot be improved") {
    auto b = triangle_plus_complete();
    auto result = amplitude_scan(b.net, b.part, {1}, {0.0, 1.0, 2.0, 4.0});
    CHECK_FALSE(result.improved);
    CHECK(result.schedule.amplitudes.empty());
}

TEST_CASE("scan on the weighted triangle selects 2 sqrt 2 on the bundled grid") {
    auto b = triangle_plus_complete();
    const double root2 = std::sqrt(2.0);
    auto result = amplitude_scan(b.net, b.part, {0}, {0.0, root2, 2.0 * root2, 4.0 * root2});
    CHECK(result.improved);
    CHECK(result.selected_u == doctest::Approx(2.0 * root2));
    CHECK(std::abs(result.robustness_before(0) - 0.109) < 5e-3);
    CHECK(std::abs(result.robustness_after(0) - 0.133) < 5e-3);

    // schedule carries the asymmetric pair +-u/2 on the first tree edge
    CHECK(result.schedule.amplitudes.size() == 2);
    CHECK(result.schedule.amplitude(1, 0) == doctest::Approx(root2));
    CHECK(result.schedule.amplitude(0, 1) == doctest::Approx(-root2));

    // and the reported robustness matches a fresh certificate of the schedule
    auto cert = certify(b.net, b.part, result.schedule);
    CHECK(cert.robustness_controlled(0) == doctest::Approx(result.robustness_after(0)));
}

TEST_CASE("scan objective is reproducible and trace-complete") {
    auto b = triangle_plus_complete();
    std::vector<double> grid{0.0, 1.0, 2.0, 3.0};
    auto r1 = amplitude_scan(b.net, b.part, {0}, grid);
    auto r2 = amplitude_scan(b.net, b.part, {0}, grid);
    REQUIRE(r1.trace.size() == grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        CHECK(r1.trace[g].u == grid[g]);
        CHECK(r1.trace[g].objective == r2.trace[g].objective);
    }
    CHECK(r1.selected_u == r2.selected_u);
}

TEST_CASE("returned schedules only touch intra edges and existing connections") {
    auto b = triangle_plus_complete();
    auto result = amplitude_scan(b.net, b.part, {0}, {0.0, 2.0});
    CHECK_NOTHROW(result.schedule.validate_for(b.net, b.part));
    for (const auto& [key, u] : result.schedule.amplitudes) {
        CHECK(b.net.weights(key.first, key.second) > 0.0);
    }
}

TEST_CASE("frontier at u = 0 is the spectrum of J itself") {
    Eigen::MatrixXd j(2, 2);
    j << -1.0, 4.0, 0.0, -2.0;
    Eigen::MatrixXd pattern = Eigen::MatrixXd::Zero(2, 2);
    pattern(1, 0) = 1.0;
    auto frontier = hurwitz_frontier(j, pattern, {0.0, 1.0});
    CHECK(frontier[0].second(0).real() == doctest::Approx(-2.0));
    CHECK(frontier[0].second(1).real() == doctest::Approx(-1.0));

    // at unit amplitude the averaged block is the worked 2x2 example
    Eigen::MatrixXd expect(2, 2);
    expect << -1.0, 4.0, -2.0, -2.0;
    auto expected_spectrum = sorted_spectrum(expect);
    CHECK((frontier[1].second - expected_spectrum).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("2x2 determinant law: det grows with the squared amplitude") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> dist(0.2, 2.0);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd j(2, 2);
        j << -dist(rng), dist(rng), 0.0, -dist(rng);
        Eigen::MatrixXd pattern = Eigen::MatrixXd::Zero(2, 2);
        pattern(1, 0) = 1.0;
        for (int g = 0; g < 20; ++g) {
            const double a = 0.15 * g;
            auto frontier = hurwitz_frontier(j, pattern, {a});
            const auto& eig = frontier[0].second;
            const double det = (eig(0) * eig(1)).real();
            const double expect = j(0, 0) * j(1, 1) + j(0, 1) * j(0, 1) * a * a / 2.0;
            CHECK(det == doctest::Approx(expect).epsilon(1e-6));
            // trace is preserved along the whole grid
            CHECK((eig(0) + eig(1)).real() == doctest::Approx(j.trace()).epsilon(1e-9));
        }
    }
}

TEST_CASE("scan honors the thread cap environment variable") {
    // smoke: results identical with fan-out forced to 1
    auto b = triangle_plus_complete();
    setenv("VIBROKIT_THREADS", "1", 1);
    auto serial = amplitude_scan(b.net, b.part, {0}, {0.0, 1.0, 2.0});
    unsetenv("VIBROKIT_THREADS");
    auto parallel = amplitude_scan(b.net, b.part, {0}, {0.0, 1.0, 2.0});
    CHECK(serial.selected_u == parallel.selected_u);
    for (std::size_t g = 0; g < serial.trace.size(); ++g) {
        CHECK(serial.trace[g].objective == parallel.trace[g].objective);
    }
}
