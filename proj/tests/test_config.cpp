#include "doctest.h"

#include "vibrokit/config.hpp"

using namespace vibrokit;

namespace {

const char* kMinimal = R"({
  "network": {
    "nodes": 4,
    "frequencies": [1.0, 1.0, 2.0, 2.0],
    "edges": [
      {"i": 1, "j": 2, "weight": 0.5},
      {"i": 3, "j": 4, "weight": 0.5},
      {"i": 1, "j": 3, "weight": 0.1},
      {"i": 1, "j": 4, "weight": 0.1},
      {"i": 2, "j": 3, "weight": 0.1},
      {"i": 2, "j": 4, "weight": 0.1}
    ]
  },
  "partition": [[1, 2], [3, 4]],
  "schedule": {
    "epsilon": 0.05,
    "amplitudes": [{"i": 1, "j": 2, "u": 0.3}, {"i": 2, "j": 1, "u": -0.3}]
  }
})";

}  // namespace

TEST_CASE("minimal config parses into a valid experiment") {
    auto cfg = parse_config(kMinimal);
    CHECK(cfg.nodes == 4);
    CHECK(cfg.edges.size() == 6);
    CHECK(cfg.partition.size() == 2);
    CHECK(cfg.partition[0] == std::vector<int>{0, 1});
    CHECK(cfg.epsilon == 0.05);
    CHECK(cfg.amplitudes.size() == 2);
    CHECK(cfg.amplitudes[0].first.first == 0);
    CHECK(cfg.amplitudes[0].first.second == 1);

    auto net = cfg.network();
    CHECK(net.weights(0, 1) == 0.5);
    CHECK(validate_invariance(net, cfg.cluster_partition()).passed());
    CHECK_NOTHROW(cfg.schedule().validate_for(net, cfg.cluster_partition()));
}

TEST_CASE("serialization round-trips exactly") {
    auto cfg = parse_config(kMinimal);
    cfg.simulation.horizon = 123.5;
    cfg.simulation.theta0.cluster_phases = {0.0, 1.25};
    cfg.analysis.u_grid = {0.0, 1.0, 2.0};
    cfg.analysis.design_targets = {0};
    auto text = serialize_config(cfg);
    auto back = parse_config(text);
    CHECK(back == cfg);
    CHECK(config_digest(back) == config_digest(cfg));
}

TEST_CASE("digest changes when the experiment changes") {
    auto a = parse_config(kMinimal);
    auto b = a;
    b.epsilon = 0.04;
    CHECK(config_digest(a) != config_digest(b));
}

TEST_CASE("malformed text reports a parse position") {
    try {
        parse_config("{ \"network\": { \"nodes\": }");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.position > 0);
    }
}

TEST_CASE("schema violations are rejected") {
    SUBCASE("edge references an out-of-range node") {
        std::string text = kMinimal;
        auto pos = text.find("\"j\": 2");
        text.replace(pos, 6, "\"j\": 9");
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    }
    SUBCASE("amplitude on a missing edge") {
        auto cfg = parse_config(kMinimal);
        cfg.edges.erase(cfg.edges.begin());  // drop edge (1,2)
        CHECK_THROWS_AS(parse_config(serialize_config(cfg)), ConfigError);
    }
    SUBCASE("nonzero amplitude across clusters") {
        auto cfg = parse_config(kMinimal);
        cfg.amplitudes = {{{0, 2}, 0.5}};
        CHECK_THROWS_AS(parse_config(serialize_config(cfg)), ConfigError);
    }
    SUBCASE("frequency list of the wrong length") {
        std::string text = kMinimal;
        auto pos = text.find("[1.0, 1.0, 2.0, 2.0]");
        text.replace(pos, 20, "[1.0, 1.0, 2.0]");
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    }
    SUBCASE("negative epsilon") {
        std::string text = kMinimal;
        auto pos = text.find("0.05");
        text.replace(pos, 4, "-0.1");
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    }
    SUBCASE("explicit theta0 must cover every node") {
        auto cfg = parse_config(kMinimal);
        cfg.simulation.theta0.mode = "explicit";
        cfg.simulation.theta0.values = {0.0, 0.1};
        CHECK_THROWS_AS(parse_config(serialize_config(cfg)), ConfigError);
    }
}

TEST_CASE("bundled example config loads, validates and matches its blocks") {
    auto cfg = load_config(std::string(VIBROKIT_CONFIG_DIR) + "/example_clusters.json");
    CHECK(cfg.nodes == 14);
    CHECK(cfg.partition.size() == 3);
    auto net = cfg.network();
    auto part = cfg.cluster_partition();
    CHECK(validate_invariance(net, part).passed());

    auto red = build_reduction(net, part);
    auto J = assemble_J(red, compute_R(red));
    Eigen::MatrixXd j1(2, 2);
    j1 << -0.06, 0.06, 0.0, -0.18;
    CHECK((J[0] - j1).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((J[1] + 3.0 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((J[2] + 6.0 * Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
}
