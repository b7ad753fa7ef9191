#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vibrokit/certify.hpp"
#include "vibrokit/network.hpp"
#include "vibrokit/vibration.hpp"

namespace vibrokit {

/// Raised on malformed configuration text; `position` is the byte offset the
/// parser reached (0 for schema-level problems).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, std::size_t position)
        : std::runtime_error(message), position(position) {}
    std::size_t position = 0;
};

struct Theta0Spec {
    std::string mode = "manifold_perturbed";  // or "explicit"
    double perturbation = 0.1;
    std::vector<double> cluster_phases;  // base phase per cluster, optional
    std::vector<double> values;          // explicit mode only, one per node

    bool operator==(const Theta0Spec&) const = default;
};

struct SimulationSpec {
    double horizon = 100.0;
    double dt = 1e-3;
    std::uint64_t seed = 42;
    double tol_sync = 1e-2;
    int record_stride = 1;
    Theta0Spec theta0;

    bool operator==(const SimulationSpec&) const = default;
};

struct AnalysisSpec {
    double s0 = kPi / 2.0;
    int quadrature_points = 4096;
    std::string gamma_method = "analytic";  // or "sampled"
    int mc_samples = 10000;
    std::vector<double> u_grid;
    std::vector<double> eps_grid;
    std::vector<int> design_targets;  // 1-based cluster indices

    bool operator==(const AnalysisSpec&) const = default;
};

/// Full experiment description. Node and cluster references are 1-based in
/// the file and stored 0-based here.
struct ExperimentConfig {
    int nodes = 0;
    std::vector<WeightedEdge> edges;
    std::vector<double> frequencies;
    std::vector<std::vector<int>> partition;
    double epsilon = 1.0;
    std::vector<std::pair<std::pair<int, int>, double>> amplitudes;  // (i, j) -> u
    SimulationSpec simulation;
    AnalysisSpec analysis;
    std::string output_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;

    OscillatorNetwork network() const;
    ClusterPartition cluster_partition() const;
    VibrationSchedule schedule() const;
    CertifyOptions certify_options() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a digest of the canonical serialized form, hex encoded. Reports
/// embed it so outputs can be traced back to their inputs.
std::string config_digest(const ExperimentConfig& cfg);

}  // namespace vibrokit
