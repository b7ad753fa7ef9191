#pragma once

#include <vector>

#include <Eigen/Dense>

#include "vibrokit/certify.hpp"

namespace vibrokit {

/// One evaluated grid point of an amplitude scan.
struct ScanPoint {
    double u = 0.0;
    bool hurwitz = false;
    Eigen::VectorXd robustness;  // per targeted cluster, NaN when not Hurwitz
    double objective = 0.0;      // min over targets, -inf when infeasible
};

struct DesignResult {
    VibrationSchedule schedule;
    std::vector<int> targets;
    Eigen::VectorXd robustness_before;  // per targeted cluster
    Eigen::VectorXd robustness_after;
    double selected_u = 0.0;
    bool improved = false;
    std::vector<ScanPoint> trace;
};

/// Scans dither amplitudes over a grid for the targeted clusters. Each grid
/// value u is realized as the lower-triangular construction with +-u/2 on
/// the two orientations of the cluster's first tree edge, so the generator's
/// subdiagonal amplitude is u/2. Returns the u maximizing the minimum
/// targeted robustness of the averaged blocks, subject to every averaged
/// block being Hurwitz; ties break toward smaller |u|. When no grid value
/// beats the uncontrolled robustness the result keeps the empty schedule and
/// is flagged unimproved.
DesignResult amplitude_scan(const OscillatorNetwork& net, const ClusterPartition& part,
                            const std::vector<int>& target_clusters,
                            const std::vector<double>& u_grid, double s0 = kPi / 2.0,
                            double epsilon = 0.02, int quadrature_points = 4096);

/// Spectrum of the averaged block along an amplitude grid, for one cluster
/// block J and a unit generator pattern scaled by each u.
std::vector<std::pair<double, Eigen::VectorXcd>> hurwitz_frontier(
    const Eigen::MatrixXd& J_block, const Eigen::MatrixXd& P_hat_pattern,
    const std::vector<double>& u_grid, double s0 = kPi / 2.0, int quadrature_points = 4096);

/// Thread cap for grid fan-out, from VIBROKIT_THREADS (defaults to the
/// hardware concurrency, at least 1).
int thread_cap();

}  // namespace vibrokit
