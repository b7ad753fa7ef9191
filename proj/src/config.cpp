#include "vibrokit/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vibrokit {

using nlohmann::json;

namespace {

int node_index(const json& v, int n, const char* what) {
    if (!v.is_number_integer()) throw ConfigError(std::string(what) + ": node id must be an integer", 0);
    const int id = v.get<int>();
    if (id < 1 || id > n) {
        throw ConfigError(std::string(what) + ": node id " + std::to_string(id) +
                              " outside 1.." + std::to_string(n),
                          0);
    }
    return id - 1;
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

}  // namespace

OscillatorNetwork ExperimentConfig::network() const {
    Eigen::VectorXd freq(nodes);
    for (int i = 0; i < nodes; ++i) freq(i) = frequencies[i];
    return OscillatorNetwork::from_edges(nodes, edges, freq);
}

ClusterPartition ExperimentConfig::cluster_partition() const { return {partition}; }

VibrationSchedule ExperimentConfig::schedule() const {
    VibrationSchedule s;
    s.epsilon = epsilon;
    for (const auto& [key, u] : amplitudes) s.amplitudes[key] = u;
    return s;
}

CertifyOptions ExperimentConfig::certify_options() const {
    CertifyOptions opts;
    opts.s0 = analysis.s0;
    opts.quadrature_points = analysis.quadrature_points;
    opts.gamma_for_S =
        analysis.gamma_method == "sampled" ? GammaMethod::Sampled : GammaMethod::Analytic;
    opts.gamma.mc_samples = analysis.mc_samples;
    return opts;
}

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(e.what(), e.byte);
    }

    ExperimentConfig cfg;
    try {
        const json& net = root.at("network");
        cfg.nodes = net.at("nodes").get<int>();
        if (cfg.nodes < 1) throw ConfigError("network.nodes must be positive", 0);
        cfg.frequencies = net.at("frequencies").get<std::vector<double>>();
        if (static_cast<int>(cfg.frequencies.size()) != cfg.nodes) {
            throw ConfigError("network.frequencies length must equal network.nodes", 0);
        }
        for (const json& e : net.at("edges")) {
            WeightedEdge edge;
            edge.i = node_index(e.at("i"), cfg.nodes, "network.edges");
            edge.j = node_index(e.at("j"), cfg.nodes, "network.edges");
            edge.weight = e.at("weight").get<double>();
            if (edge.i == edge.j) throw ConfigError("network.edges: self loop", 0);
            if (!(edge.weight > 0.0) || !std::isfinite(edge.weight)) {
                throw ConfigError("network.edges: weights must be finite and positive", 0);
            }
            cfg.edges.push_back(edge);
        }

        for (const json& c : root.at("partition")) {
            std::vector<int> cluster;
            for (const json& v : c) cluster.push_back(node_index(v, cfg.nodes, "partition"));
            cfg.partition.push_back(cluster);
        }

        if (root.contains("schedule")) {
            const json& sched = root.at("schedule");
            cfg.epsilon = field_or(sched, "epsilon", 1.0);
            if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) {
                throw ConfigError("schedule.epsilon must be finite and positive", 0);
            }
            if (sched.contains("amplitudes")) {
                for (const json& a : sched.at("amplitudes")) {
                    const int i = node_index(a.at("i"), cfg.nodes, "schedule.amplitudes");
                    const int j = node_index(a.at("j"), cfg.nodes, "schedule.amplitudes");
                    const double u = a.at("u").get<double>();
                    if (!std::isfinite(u)) {
                        throw ConfigError("schedule.amplitudes: non-finite amplitude", 0);
                    }
                    cfg.amplitudes.push_back({{i, j}, u});
                }
            }
        }

        if (root.contains("simulation")) {
            const json& sim = root.at("simulation");
            cfg.simulation.horizon = field_or(sim, "horizon", cfg.simulation.horizon);
            cfg.simulation.dt = field_or(sim, "dt", cfg.simulation.dt);
            cfg.simulation.seed = field_or<std::uint64_t>(sim, "seed", cfg.simulation.seed);
            cfg.simulation.tol_sync = field_or(sim, "tol_sync", cfg.simulation.tol_sync);
            cfg.simulation.record_stride =
                field_or(sim, "record_stride", cfg.simulation.record_stride);
            if (!(cfg.simulation.horizon >= 0.0) || !(cfg.simulation.dt > 0.0) ||
                cfg.simulation.record_stride < 1) {
                throw ConfigError("simulation: need horizon >= 0, dt > 0, record_stride >= 1", 0);
            }
            if (sim.contains("theta0")) {
                const json& t0 = sim.at("theta0");
                cfg.simulation.theta0.mode = field_or<std::string>(t0, "mode", "manifold_perturbed");
                if (cfg.simulation.theta0.mode != "manifold_perturbed" &&
                    cfg.simulation.theta0.mode != "explicit") {
                    throw ConfigError("simulation.theta0.mode must be manifold_perturbed or explicit",
                                      0);
                }
                cfg.simulation.theta0.perturbation = field_or(t0, "perturbation", 0.1);
                cfg.simulation.theta0.cluster_phases =
                    field_or(t0, "cluster_phases", std::vector<double>{});
                cfg.simulation.theta0.values = field_or(t0, "values", std::vector<double>{});
                if (cfg.simulation.theta0.mode == "explicit" &&
                    static_cast<int>(cfg.simulation.theta0.values.size()) != cfg.nodes) {
                    throw ConfigError("simulation.theta0.values must list one phase per node", 0);
                }
            }
        }

        if (root.contains("analysis")) {
            const json& an = root.at("analysis");
            cfg.analysis.s0 = field_or(an, "s0", cfg.analysis.s0);
            cfg.analysis.quadrature_points =
                field_or(an, "quadrature_points", cfg.analysis.quadrature_points);
            cfg.analysis.gamma_method =
                field_or<std::string>(an, "gamma_method", cfg.analysis.gamma_method);
            if (cfg.analysis.gamma_method != "analytic" && cfg.analysis.gamma_method != "sampled") {
                throw ConfigError("analysis.gamma_method must be analytic or sampled", 0);
            }
            cfg.analysis.mc_samples = field_or(an, "mc_samples", cfg.analysis.mc_samples);
            cfg.analysis.u_grid = field_or(an, "u_grid", std::vector<double>{});
            cfg.analysis.eps_grid = field_or(an, "eps_grid", std::vector<double>{});
            if (an.contains("design_targets")) {
                for (const json& t : an.at("design_targets")) {
                    const int k = t.get<int>();
                    if (k < 1 || k > static_cast<int>(cfg.partition.size())) {
                        throw ConfigError("analysis.design_targets: cluster index out of range", 0);
                    }
                    cfg.analysis.design_targets.push_back(k - 1);
                }
            }
        }

        if (root.contains("output")) {
            cfg.output_dir = field_or<std::string>(root.at("output"), "dir", cfg.output_dir);
        }
    } catch (const json::exception& e) {
        throw ConfigError(e.what(), 0);
    }

    // Cross references: schedule entries must name existing intra edges.
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(cfg.nodes, cfg.nodes);
    for (const auto& e : cfg.edges) {
        w(e.i, e.j) = e.weight;
        w(e.j, e.i) = e.weight;
    }
    std::vector<int> owner(cfg.nodes, -1);
    for (std::size_t k = 0; k < cfg.partition.size(); ++k) {
        for (int v : cfg.partition[k]) owner[v] = static_cast<int>(k);
    }
    for (const auto& [key, u] : cfg.amplitudes) {
        if (w(key.first, key.second) <= 0.0) {
            throw ConfigError("schedule.amplitudes: (" + std::to_string(key.first + 1) + "," +
                                  std::to_string(key.second + 1) + ") is not an edge",
                              0);
        }
        if (u != 0.0 && owner[key.first] != owner[key.second]) {
            throw ConfigError("schedule.amplitudes: nonzero amplitude on inter-cluster edge", 0);
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path, 0);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json root;
    root["network"]["nodes"] = cfg.nodes;
    root["network"]["frequencies"] = cfg.frequencies;
    root["network"]["edges"] = json::array();
    for (const auto& e : cfg.edges) {
        root["network"]["edges"].push_back({{"i", e.i + 1}, {"j", e.j + 1}, {"weight", e.weight}});
    }
    root["partition"] = json::array();
    for (const auto& c : cfg.partition) {
        json cluster = json::array();
        for (int v : c) cluster.push_back(v + 1);
        root["partition"].push_back(cluster);
    }
    root["schedule"]["epsilon"] = cfg.epsilon;
    root["schedule"]["amplitudes"] = json::array();
    for (const auto& [key, u] : cfg.amplitudes) {
        root["schedule"]["amplitudes"].push_back(
            {{"i", key.first + 1}, {"j", key.second + 1}, {"u", u}});
    }
    root["simulation"] = {{"horizon", cfg.simulation.horizon},
                          {"dt", cfg.simulation.dt},
                          {"seed", cfg.simulation.seed},
                          {"tol_sync", cfg.simulation.tol_sync},
                          {"record_stride", cfg.simulation.record_stride}};
    root["simulation"]["theta0"] = {{"mode", cfg.simulation.theta0.mode},
                                    {"perturbation", cfg.simulation.theta0.perturbation}};
    if (!cfg.simulation.theta0.cluster_phases.empty()) {
        root["simulation"]["theta0"]["cluster_phases"] = cfg.simulation.theta0.cluster_phases;
    }
    if (!cfg.simulation.theta0.values.empty()) {
        root["simulation"]["theta0"]["values"] = cfg.simulation.theta0.values;
    }
    root["analysis"] = {{"s0", cfg.analysis.s0},
                        {"quadrature_points", cfg.analysis.quadrature_points},
                        {"gamma_method", cfg.analysis.gamma_method},
                        {"mc_samples", cfg.analysis.mc_samples}};
    if (!cfg.analysis.u_grid.empty()) root["analysis"]["u_grid"] = cfg.analysis.u_grid;
    if (!cfg.analysis.eps_grid.empty()) root["analysis"]["eps_grid"] = cfg.analysis.eps_grid;
    if (!cfg.analysis.design_targets.empty()) {
        json targets = json::array();
        for (int k : cfg.analysis.design_targets) targets.push_back(k + 1);
        root["analysis"]["design_targets"] = targets;
    }
    root["output"]["dir"] = cfg.output_dir;
    return root.dump(2) + "\n";
}

std::string config_digest(const ExperimentConfig& cfg) {
    const std::string canonical = serialize_config(cfg);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace vibrokit
