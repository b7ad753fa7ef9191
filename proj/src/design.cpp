#include "vibrokit/design.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <thread>

namespace vibrokit {

int thread_cap() {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("VIBROKIT_THREADS")) {
        int requested = std::atoi(env);
        if (requested >= 1) cap = std::min(cap, requested);
    }
    return cap;
}

namespace {

// Evaluate fn(i) for i in [0, n) on up to thread_cap() workers. Results land
// by index, so the merge order never depends on scheduling.
void parallel_for_index(int n, const std::function<void(int)>& fn) {
    const int workers = std::min(thread_cap(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

DesignResult amplitude_scan(const OscillatorNetwork& net, const ClusterPartition& part,
                            const std::vector<int>& target_clusters,
                            const std::vector<double>& u_grid, double s0, double epsilon,
                            int quadrature_points) {
    if (target_clusters.empty()) {
        throw std::invalid_argument("amplitude_scan: no target clusters");
    }
    for (int k : target_clusters) {
        if (k < 0 || k >= part.num_clusters()) {
            throw std::invalid_argument("amplitude_scan: target cluster out of range");
        }
    }
    if (u_grid.empty()) {
        throw std::invalid_argument("amplitude_scan: empty amplitude grid");
    }

    IncidenceReduction red = build_reduction(net, part);
    ReductionMatrices rm = compute_R(red);
    const auto J = assemble_J(red, rm);

    DesignResult result;
    result.targets = target_clusters;
    result.schedule.epsilon = epsilon;

    const int nt = static_cast<int>(target_clusters.size());
    result.robustness_before.resize(nt);
    for (int t = 0; t < nt; ++t) {
        result.robustness_before(t) = robustness(solve_lyapunov(J[target_clusters[t]]));
    }

    auto schedule_for = [&](double u) {
        VibrationSchedule sched;
        sched.epsilon = epsilon;
        for (int k : target_clusters) {
            // Grid value u maps to generator amplitude u/2: the asymmetric
            // pair +-u/2 across the first tree edge's two orientations.
            for (const auto& [key, amp] : design_lower_triangular(red, k, 0.5 * u).amplitudes) {
                sched.amplitudes[key] += amp;
            }
        }
        return sched;
    };

    const int ng = static_cast<int>(u_grid.size());
    result.trace.resize(ng);
    parallel_for_index(ng, [&](int g) {
        ScanPoint point;
        point.u = u_grid[g];
        point.robustness = Eigen::VectorXd::Constant(nt, std::nan(""));
        const auto P_hat = assemble_P_hat(red, rm, schedule_for(point.u));
        TransitionMatrix phi = transition_matrix(P_hat, s0);
        const auto J_bar = averaged_J(J, phi, quadrature_points);
        point.hurwitz = true;
        for (const auto& b : J_bar) point.hurwitz = point.hurwitz && is_hurwitz(b);
        if (point.hurwitz) {
            point.objective = std::numeric_limits<double>::infinity();
            for (int t = 0; t < nt; ++t) {
                point.robustness(t) = robustness(solve_lyapunov(J_bar[target_clusters[t]]));
                point.objective = std::min(point.objective, point.robustness(t));
            }
        } else {
            point.objective = -std::numeric_limits<double>::infinity();
        }
        result.trace[g] = std::move(point);
    });

    int best = -1;
    for (int g = 0; g < ng; ++g) {
        const auto& p = result.trace[g];
        if (!p.hurwitz) continue;
        if (best == -1 || p.objective > result.trace[best].objective + 1e-15 ||
            (std::abs(p.objective - result.trace[best].objective) <= 1e-15 &&
             std::abs(p.u) < std::abs(result.trace[best].u))) {
            best = g;
        }
    }
    if (best == -1) {
        throw NumericalError("amplitude_scan: no grid amplitude keeps the averaged blocks Hurwitz");
    }

    const double before_min = result.robustness_before.minCoeff();
    const auto& chosen = result.trace[best];
    if (chosen.objective > before_min + 1e-12) {
        result.improved = true;
        result.selected_u = chosen.u;
        result.schedule = schedule_for(chosen.u);
        result.robustness_after = chosen.robustness;
    } else {
        result.improved = false;
        result.selected_u = 0.0;
        result.schedule.amplitudes.clear();
        result.robustness_after = result.robustness_before;
    }
    return result;
}

std::vector<std::pair<double, Eigen::VectorXcd>> hurwitz_frontier(
    const Eigen::MatrixXd& J_block, const Eigen::MatrixXd& P_hat_pattern,
    const std::vector<double>& u_grid, double s0, int quadrature_points) {
    if (J_block.rows() != P_hat_pattern.rows() || J_block.cols() != P_hat_pattern.cols()) {
        throw std::invalid_argument("hurwitz_frontier: block shapes differ");
    }
    std::vector<std::pair<double, Eigen::VectorXcd>> out(u_grid.size());
    parallel_for_index(static_cast<int>(u_grid.size()), [&](int g) {
        const Eigen::MatrixXd scaled = u_grid[g] * P_hat_pattern;
        TransitionMatrix phi = transition_matrix({scaled}, s0);
        const auto J_bar = averaged_J({J_block}, phi, quadrature_points);
        out[g] = {u_grid[g], sorted_spectrum(J_bar[0])};
    });
    return out;
}

}  // namespace vibrokit
