#pragma once

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vibrokit/network.hpp"
#include "vibrokit/reduction.hpp"

namespace vibrokit {

/// Sinusoidal dither schedule. An entry (i, j) -> u means oscillator i's
/// coupling term along the edge to j is modulated by (u / epsilon) *
/// sin(t / epsilon); the reverse direction (j, i) may carry a different
/// amplitude. Only existing intra-cluster edges may carry amplitudes.
struct VibrationSchedule {
    double epsilon = 1.0;
    std::map<std::pair<int, int>, double> amplitudes;

    double amplitude(int i, int j) const {
        auto it = amplitudes.find({i, j});
        return it == amplitudes.end() ? 0.0 : it->second;
    }

    bool any_nonzero() const {
        for (const auto& [key, u] : amplitudes) {
            if (u != 0.0) return true;
        }
        return false;
    }

    double period() const { return kTwoPi * epsilon; }

    /// Throws std::invalid_argument on a non-positive epsilon, an amplitude
    /// keyed to a non-edge, or a nonzero amplitude on an inter-cluster edge.
    void validate_for(const OscillatorNetwork& net, const ClusterPartition& part) const;
};

/// Per-directed-edge amplitudes in the reduction's column order: first the
/// forward orientation of every intra column (the node at the +1 entry
/// receives), then the reversed orientation. Multiplying by sin(s) gives the
/// dither sample consumed by ReducedDynamics::f_ctr.
Eigen::VectorXd directed_amplitudes(const IncidenceReduction& red, const VibrationSchedule& sched);

/// Per-cluster linearization of the compact model around the synchronized
/// state: x_k' ~ (J_k + P_k(t)) x_k with P_k(t) = P_hat_k * sin(t).
struct LinearizedBlocks {
    std::vector<Eigen::MatrixXd> J;
    std::vector<Eigen::MatrixXd> P_hat;
};

std::vector<Eigen::MatrixXd> assemble_J(const IncidenceReduction& red,
                                        const ReductionMatrices& rm);

std::vector<Eigen::MatrixXd> assemble_P_hat(const IncidenceReduction& red,
                                            const ReductionMatrices& rm,
                                            const VibrationSchedule& sched);

LinearizedBlocks assemble_linearized(const IncidenceReduction& red, const ReductionMatrices& rm,
                                     const VibrationSchedule& sched);

/// Amplitudes for one cluster realizing a strictly lower-triangular dither
/// generator: +u on the first tree edge in its forward orientation, -u on
/// the reverse. For 2-node clusters the 1x1 generator is necessarily zero
/// and the fragment is flagged linearly inert.
struct LowerTriangularDesign {
    int cluster = 0;
    std::vector<std::pair<std::pair<int, int>, double>> amplitudes;  // (i, j) -> u
    bool linearly_inert = false;
};

LowerTriangularDesign design_lower_triangular(const IncidenceReduction& red, int cluster, double u);

/// Entrywise check (tolerance 1e-12) that each block has zeros on and above
/// the diagonal.
std::vector<bool> is_strictly_lower_triangular(const std::vector<Eigen::MatrixXd>& blocks,
                                               double tol = 1e-12);

}  // namespace vibrokit
