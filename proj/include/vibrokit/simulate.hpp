#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "vibrokit/network.hpp"
#include "vibrokit/reduction.hpp"
#include "vibrokit/vibration.hpp"

namespace vibrokit {

enum class TrajectoryKind { Full, Reduced };

/// Fixed-step integration record. `states` holds one sampled state per row:
/// phases for the full model, (x, y) for the reduced one. The grid is
/// uniform at dt * stride (the final step is always recorded).
struct Trajectory {
    Eigen::VectorXd times;
    Eigen::MatrixXd states;
    TrajectoryKind kind = TrajectoryKind::Full;
    double dt = 0.0;
    int stride = 1;
    std::uint64_t schedule_digest = 0;

    int samples() const { return static_cast<int>(times.size()); }
};

/// Classic fourth-order fixed-step integration of the controlled phase
/// model. Requires dt <= epsilon / 20 whenever the schedule carries a
/// nonzero amplitude, so the dither is resolved. Aborts with NumericalError
/// if the state leaves the finite range.
Trajectory simulate_full(const OscillatorNetwork& net, const ClusterPartition& part,
                         const VibrationSchedule& sched, const Eigen::VectorXd& theta0,
                         double horizon, double dt, int stride = 1);

/// Same stepping rules applied to the phase-difference model built from a
/// reduction.
Trajectory simulate_reduced(const IncidenceReduction& red, const ReducedDynamics& dyn,
                            const VibrationSchedule& sched, const Eigen::VectorXd& x0,
                            const Eigen::VectorXd& y0, double horizon, double dt, int stride = 1);

/// Convergence call on the tail window (final 20% of the horizon) of a full
/// trajectory: converged iff the wrapped per-cluster max pairwise error
/// stays below tol_sync throughout the tail.
struct SyncVerdict {
    Eigen::VectorXd terminal_error;  // per cluster, rad
    bool converged = false;
    double tail_max_error = 0.0;
    int tail_slope_sign = 0;  // sign of the fitted error slope over the tail
    double tol_sync = 0.0;
};

SyncVerdict verdict(const Trajectory& traj, const ClusterPartition& part, double tol_sync = 1e-2);

/// Seeded default initial state: per-cluster base phases plus a uniform
/// random perturbation of the given magnitude on every node.
Eigen::VectorXd default_initial_state(const OscillatorNetwork& net, const ClusterPartition& part,
                                      std::uint64_t seed, double perturbation = 0.1,
                                      const std::vector<double>& cluster_phases = {});

std::uint64_t schedule_digest(const VibrationSchedule& sched);

}  // namespace vibrokit
