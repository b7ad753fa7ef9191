#include "vibrokit/simulate.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace vibrokit {

namespace {

struct DirectedAmp {
    int receiver;
    int source;
    double u;
};

// Shared RK4 driver over a time-dependent right-hand side.
Trajectory integrate(const std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>& rhs,
                     const Eigen::VectorXd& state0, double horizon, double dt, int stride,
                     TrajectoryKind kind, std::uint64_t digest) {
    if (!(dt > 0.0) || !(horizon >= 0.0)) {
        throw std::invalid_argument("simulate: need dt > 0 and horizon >= 0");
    }
    if (stride < 1) stride = 1;

    const long steps = std::lround(horizon / dt);
    const int dim = static_cast<int>(state0.size());

    std::vector<double> times;
    std::vector<Eigen::VectorXd> samples;
    times.reserve(static_cast<std::size_t>(steps / stride) + 2);
    samples.reserve(static_cast<std::size_t>(steps / stride) + 2);

    Eigen::VectorXd state = state0;
    Eigen::VectorXd k1(dim), k2(dim), k3(dim), k4(dim), work(dim);

    times.push_back(0.0);
    samples.push_back(state);
    for (long i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        rhs(t, state, k1);
        work = state + 0.5 * dt * k1;
        rhs(t + 0.5 * dt, work, k2);
        work = state + 0.5 * dt * k2;
        rhs(t + 0.5 * dt, work, k3);
        work = state + dt * k3;
        rhs(t + dt, work, k4);
        state += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
        if (!state.allFinite()) {
            throw NumericalError("simulate: non-finite state at t = " +
                                 std::to_string(t + dt));
        }
        if ((i + 1) % stride == 0 || i + 1 == steps) {
            times.push_back(static_cast<double>(i + 1) * dt);
            samples.push_back(state);
        }
    }

    Trajectory traj;
    traj.kind = kind;
    traj.dt = dt;
    traj.stride = stride;
    traj.schedule_digest = digest;
    traj.times = Eigen::Map<Eigen::VectorXd>(times.data(), static_cast<long>(times.size()));
    traj.states.resize(static_cast<long>(samples.size()), dim);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        traj.states.row(static_cast<long>(s)) = samples[s].transpose();
    }
    return traj;
}

void require_dither_resolved(const VibrationSchedule& sched, double dt) {
    if (sched.any_nonzero() && dt > sched.epsilon / 20.0 * (1.0 + 1e-12)) {
        throw std::invalid_argument("simulate: dt must be <= epsilon/20 to resolve the dither (dt=" +
                                    std::to_string(dt) + ", epsilon=" +
                                    std::to_string(sched.epsilon) + ")");
    }
}

}  // namespace

std::uint64_t schedule_digest(const VibrationSchedule& sched) {
    // FNV-1a over the raw bytes of (epsilon, sorted amplitude entries).
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* data, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
    };
    mix(&sched.epsilon, sizeof(double));
    for (const auto& [key, u] : sched.amplitudes) {
        mix(&key.first, sizeof(int));
        mix(&key.second, sizeof(int));
        mix(&u, sizeof(double));
    }
    return h;
}

Trajectory simulate_full(const OscillatorNetwork& net, const ClusterPartition& part,
                         const VibrationSchedule& sched, const Eigen::VectorXd& theta0,
                         double horizon, double dt, int stride) {
    net.check();
    sched.validate_for(net, part);
    require_dither_resolved(sched, dt);
    if (theta0.size() != net.size()) {
        throw std::invalid_argument("simulate_full: theta0 length mismatch");
    }

    const auto edges = net.edge_list();
    std::vector<DirectedAmp> dithered;
    for (const auto& [key, u] : sched.amplitudes) {
        if (u != 0.0) dithered.push_back({key.first, key.second, u});
    }
    const bool controlled = !dithered.empty();
    const double eps = sched.epsilon;
    const Eigen::VectorXd omega = net.frequencies;

    auto rhs = [&](double t, const Eigen::VectorXd& theta, Eigen::VectorXd& out) {
        out = omega;
        for (const auto& e : edges) {
            const double s = std::sin(theta(e.j) - theta(e.i));
            out(e.i) += e.weight * s;
            out(e.j) -= e.weight * s;
        }
        if (controlled) {
            const double dither = std::sin(t / eps) / eps;
            for (const auto& d : dithered) {
                out(d.receiver) += d.u * dither * std::sin(theta(d.source) - theta(d.receiver));
            }
        }
    };
    return integrate(rhs, theta0, horizon, dt, stride, TrajectoryKind::Full,
                     schedule_digest(sched));
}

Trajectory simulate_reduced(const IncidenceReduction& red, const ReducedDynamics& dyn,
                            const VibrationSchedule& sched, const Eigen::VectorXd& x0,
                            const Eigen::VectorXd& y0, double horizon, double dt, int stride) {
    require_dither_resolved(sched, dt);
    if (x0.size() != dyn.x_dim() || y0.size() != dyn.y_dim()) {
        throw std::invalid_argument("simulate_reduced: initial state dimension mismatch");
    }

    const Eigen::VectorXd amps = directed_amplitudes(red, sched);
    const bool controlled = amps.cwiseAbs().maxCoeff() > 0.0;
    const double eps = sched.epsilon;
    const int nx = dyn.x_dim();
    const int ny = dyn.y_dim();

    Eigen::VectorXd state0(nx + ny);
    state0 << x0, y0;

    auto rhs = [&](double t, const Eigen::VectorXd& state, Eigen::VectorXd& out) {
        const Eigen::VectorXd x = state.head(nx);
        const Eigen::VectorXd y = state.tail(ny);
        out.head(nx) = dyn.f_intra(x) + dyn.f_inter(x, y);
        out.tail(ny) = dyn.g(x, y);
        if (controlled) {
            const Eigen::VectorXd sample = amps * std::sin(t / eps);
            out.head(nx) += dyn.f_ctr(sample, x) / eps;
            out.tail(ny) += dyn.g_ctr(sample, x) / eps;
        }
    };
    return integrate(rhs, state0, horizon, dt, stride, TrajectoryKind::Reduced,
                     schedule_digest(sched));
}

SyncVerdict verdict(const Trajectory& traj, const ClusterPartition& part, double tol_sync) {
    if (traj.kind != TrajectoryKind::Full) {
        throw std::invalid_argument("verdict: needs a full-model trajectory");
    }
    if (traj.samples() == 0) {
        throw std::invalid_argument("verdict: empty trajectory");
    }

    SyncVerdict v;
    v.tol_sync = tol_sync;
    const int r = part.num_clusters();
    const double t_end = traj.times(traj.samples() - 1);
    const double tail_start = 0.8 * t_end;

    v.terminal_error = lift_error(traj.states.row(traj.samples() - 1).transpose(), part);

    double sum_t = 0.0, sum_e = 0.0, sum_tt = 0.0, sum_te = 0.0;
    int count = 0;
    bool ok = true;
    for (int s = 0; s < traj.samples(); ++s) {
        if (traj.times(s) < tail_start) continue;
        Eigen::VectorXd err = lift_error(traj.states.row(s).transpose(), part);
        double emax = r > 0 ? err.maxCoeff() : 0.0;
        v.tail_max_error = std::max(v.tail_max_error, emax);
        if (emax >= tol_sync) ok = false;
        sum_t += traj.times(s);
        sum_e += emax;
        sum_tt += traj.times(s) * traj.times(s);
        sum_te += traj.times(s) * emax;
        ++count;
    }
    v.converged = ok && count > 0;
    if (count >= 2) {
        const double denom = count * sum_tt - sum_t * sum_t;
        if (denom > 0.0) {
            const double slope = (count * sum_te - sum_t * sum_e) / denom;
            v.tail_slope_sign = slope > 1e-12 ? 1 : (slope < -1e-12 ? -1 : 0);
        }
    }
    return v;
}

Eigen::VectorXd default_initial_state(const OscillatorNetwork& net, const ClusterPartition& part,
                                      std::uint64_t seed, double perturbation,
                                      const std::vector<double>& cluster_phases) {
    const int n = net.size();
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < part.num_clusters(); ++k) {
        const double base = k < static_cast<int>(cluster_phases.size()) ? cluster_phases[k] : 0.0;
        for (int v : part.clusters[k]) theta(v) = base;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-perturbation, perturbation);
    for (int v = 0; v < n; ++v) theta(v) += dist(rng);
    return theta;
}

}  // namespace vibrokit
