#include "vibrokit/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace vibrokit {

namespace {

double spectral_norm(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    return m.jacobiSvd().singularValues()(0);
}

}  // namespace

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument("solve_lyapunov: matrix must be square");
    }
    const int d = static_cast<int>(A.rows());

    // vec(A^T X + X A) = (I (x) A^T + A^T (x) I) vec(X)
    Eigen::MatrixXd op = Eigen::MatrixXd::Zero(d * d, d * d);
    for (int c = 0; c < d; ++c) {
        op.block(c * d, c * d, d, d) += A.transpose();
        for (int rr = 0; rr < d; ++rr) {
            for (int cc = 0; cc < d; ++cc) {
                op(c * d + rr, cc * d + rr) += A(cc, c);
            }
        }
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d * d);
    for (int i = 0; i < d; ++i) rhs(i * d + i) = -1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(op);
    if (!lu.isInvertible()) {
        // Conditioning witness: the smallest |lambda_i + lambda_j| over the
        // spectrum, which is what degenerates the operator.
        Eigen::VectorXcd eig = sorted_spectrum(A);
        double worst = std::numeric_limits<double>::infinity();
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                worst = std::min(worst, std::abs(eig(i) + eig(j)));
            }
        }
        throw NumericalError("solve_lyapunov: operator near singular, min |lambda_i + lambda_j| = " +
                             std::to_string(worst));
    }
    Eigen::VectorXd vec = lu.solve(rhs);
    Eigen::MatrixXd x = Eigen::Map<Eigen::MatrixXd>(vec.data(), d, d);
    x = 0.5 * (x + x.transpose()).eval();

    const double residual =
        (A.transpose() * x + x * A + Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
    if (residual > 1e-10) {
        throw NumericalError("solve_lyapunov: residual " + std::to_string(residual) +
                             " above tolerance");
    }
    return x;
}

double robustness(const Eigen::MatrixXd& X) {
    if (X.rows() != X.cols() || (X - X.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        throw std::invalid_argument("robustness: input must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(X);
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    if (lo <= 0.0) {
        throw std::invalid_argument("robustness: input must be positive definite");
    }
    return 1.0 / hi;
}

bool is_hurwitz(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return true;
    return sorted_spectrum(m).real().maxCoeff() < -1e-9;
}

Eigen::MatrixXd gamma_bounds(const ReducedDynamics& dyn, const TransitionMatrix& phi,
                             GammaMethod method, const GammaOptions& opts) {
    const int r = dyn.num_clusters();
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(r, r);
    if (dyn.R2().rows() == 0) return gamma;  // no inter-cluster edges

    if (method == GammaMethod::Analytic) {
        std::vector<double> mk_norm(r);
        for (int k = 0; k < r; ++k) mk_norm[k] = spectral_norm(dyn.inter_factor_block(k));
        const double h = kTwoPi / opts.sup_samples;
        for (int i = 0; i < opts.sup_samples; ++i) {
            const double s = phi.s0() + i * h;
            std::vector<double> inv_norm(r);
            std::vector<Eigen::MatrixXd> blocks(r);
            for (int k = 0; k < r; ++k) {
                inv_norm[k] = spectral_norm(phi.block_inverse(k, s));
                blocks[k] = phi.block(k, s);
            }
            for (int l = 0; l < r; ++l) {
                const Eigen::MatrixXd r2_block =
                    dyn.R2().middleCols(dyn.tree_offset(l), dyn.tree_count(l)) * blocks[l];
                const double col_norm = spectral_norm(r2_block);
                for (int k = 0; k < r; ++k) {
                    gamma(k, l) = std::max(gamma(k, l), inv_norm[k] * mk_norm[k] * col_norm);
                }
            }
        }
        return gamma;
    }

    // Sampled: maximize || Phi_k^{-1} f_inter^(k)(Phi z, y) || / ||z_l|| over
    // random states with z supported on one source cluster at a time. The
    // ratio is largest in the small-z limit, so z stays small.
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int nx = dyn.x_dim();
    const int ny = dyn.y_dim();
    for (int l = 0; l < r; ++l) {
        const int off = dyn.tree_offset(l);
        const int cnt = dyn.tree_count(l);
        for (int sample = 0; sample < opts.mc_samples; ++sample) {
            Eigen::VectorXd z = Eigen::VectorXd::Zero(nx);
            for (int i = 0; i < cnt; ++i) z(off + i) = normal(rng);
            const double zn = z.segment(off, cnt).norm();
            if (zn == 0.0) continue;
            z.segment(off, cnt) *= 1e-4 / zn;
            Eigen::VectorXd y(ny);
            for (int i = 0; i < ny; ++i) y(i) = angle(rng);
            const double s = phi.s0() + (angle(rng) + kPi);

            Eigen::VectorXd x = Eigen::VectorXd::Zero(nx);
            for (int k = 0; k < r; ++k) {
                x.segment(dyn.tree_offset(k), dyn.tree_count(k)) =
                    phi.block(k, s) * z.segment(dyn.tree_offset(k), dyn.tree_count(k));
            }
            const Eigen::VectorXd f = dyn.f_inter(x, y);
            for (int k = 0; k < r; ++k) {
                const Eigen::VectorXd fk =
                    phi.block_inverse(k, s) * f.segment(dyn.tree_offset(k), dyn.tree_count(k));
                gamma(k, l) = std::max(gamma(k, l), fk.norm() / 1e-4);
            }
        }
    }
    return gamma;
}

Eigen::MatrixXd build_S(const Eigen::VectorXd& robustness_controlled,
                        const Eigen::MatrixXd& gamma_bar) {
    const int r = static_cast<int>(robustness_controlled.size());
    if (gamma_bar.rows() != r || gamma_bar.cols() != r) {
        throw std::invalid_argument("build_S: dimension mismatch");
    }
    Eigen::MatrixXd s = -gamma_bar;
    for (int k = 0; k < r; ++k) s(k, k) = robustness_controlled(k) - gamma_bar(k, k);
    return s;
}

MMatrixVerdict is_m_matrix(const Eigen::MatrixXd& S) {
    MMatrixVerdict v;
    const int r = static_cast<int>(S.rows());
    v.spectrum = sorted_spectrum(S);
    v.leading_minors.resize(r);
    for (int k = 0; k < r; ++k) {
        v.leading_minors(k) = S.topLeftCorner(k + 1, k + 1).determinant();
    }
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
            if (i != j && S(i, j) > 0.0) {
                v.reason = "positive off-diagonal at (" + std::to_string(i + 1) + "," +
                           std::to_string(j + 1) + "): not a Z-matrix";
                return v;
            }
        }
    }
    for (int k = 0; k < r; ++k) {
        if (!(v.leading_minors(k) > 0.0)) {
            v.failing_minor = k + 1;
            v.reason = "leading principal minor " + std::to_string(k + 1) + " is " +
                       std::to_string(v.leading_minors(k));
            return v;
        }
    }
    v.is_m_matrix = true;
    return v;
}

StabilityCertificate certify(const OscillatorNetwork& net, const ClusterPartition& part,
                             const VibrationSchedule& sched, const CertifyOptions& opts) {
    auto stage = [](const std::string& name, auto&& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            throw NumericalError("certify[" + name + "]: " + e.what());
        }
    };

    StabilityCertificate cert;
    cert.s0 = opts.s0;
    cert.quadrature_points = opts.quadrature_points;
    cert.gamma_for_S = opts.gamma_for_S;

    ValidationReport report = validate_invariance(net, part, opts.invariance_tol);
    if (!report.passed()) {
        throw std::invalid_argument("certify[invariance]: network violates the invariance conditions");
    }
    sched.validate_for(net, part);

    IncidenceReduction red = stage("reduction", [&] { return build_reduction(net, part); });
    ReductionMatrices rm = stage("compute_R", [&] { return compute_R(red); });
    ReducedDynamics dyn(red, rm, net);

    cert.J_blocks = stage("assemble_J", [&] { return assemble_J(red, rm); });
    cert.P_hat_blocks = stage("assemble_P_hat", [&] { return assemble_P_hat(red, rm, sched); });

    TransitionMatrix phi = stage("transition_matrix", [&] {
        return transition_matrix(cert.P_hat_blocks, opts.s0, TransitionMethod::ClosedForm);
    });
    cert.J_bar_blocks =
        stage("averaged_J", [&] { return averaged_J(cert.J_blocks, phi, opts.quadrature_points); });

    cert.hurwitz_J = true;
    cert.hurwitz_J_bar = true;
    for (const auto& b : cert.J_blocks) {
        cert.J_spectra.push_back(sorted_spectrum(b));
        cert.hurwitz_J = cert.hurwitz_J && is_hurwitz(b);
    }
    for (const auto& b : cert.J_bar_blocks) {
        cert.J_bar_spectra.push_back(sorted_spectrum(b));
        cert.hurwitz_J_bar = cert.hurwitz_J_bar && is_hurwitz(b);
    }

    const int r = red.r;
    cert.robustness_uncontrolled.resize(r);
    cert.robustness_controlled.resize(r);
    stage("lyapunov", [&] {
        for (int k = 0; k < r; ++k) {
            cert.X_uncontrolled.push_back(solve_lyapunov(cert.J_blocks[k]));
            cert.robustness_uncontrolled(k) = robustness(cert.X_uncontrolled.back());
            cert.X_controlled.push_back(solve_lyapunov(cert.J_bar_blocks[k]));
            cert.robustness_controlled(k) = robustness(cert.X_controlled.back());
        }
        return 0;
    });

    cert.gamma_analytic = stage("gamma_bounds", [&] {
        return gamma_bounds(dyn, phi, GammaMethod::Analytic, opts.gamma);
    });
    cert.gamma_sampled = stage("gamma_bounds", [&] {
        return gamma_bounds(dyn, phi, GammaMethod::Sampled, opts.gamma);
    });

    const Eigen::MatrixXd& gamma =
        opts.gamma_for_S == GammaMethod::Analytic ? cert.gamma_analytic : cert.gamma_sampled;
    cert.S = build_S(cert.robustness_controlled, gamma);
    cert.m_matrix = is_m_matrix(cert.S);
    cert.certified = cert.hurwitz_J_bar && cert.m_matrix.is_m_matrix;
    return cert;
}

EpsilonThreshold estimate_epsilon_threshold(const OscillatorNetwork& net,
                                            const ClusterPartition& part,
                                            const VibrationSchedule& sched,
                                            const std::vector<double>& eps_grid,
                                            const EpsilonSearchOptions& opts) {
    if (eps_grid.empty()) {
        throw std::invalid_argument("estimate_epsilon_threshold: empty grid");
    }
    std::vector<double> grid = eps_grid;
    std::sort(grid.begin(), grid.end());

    const Eigen::VectorXd theta0 =
        default_initial_state(net, part, opts.seed, opts.perturbation, opts.cluster_phases);

    auto converged_at = [&](double eps) {
        VibrationSchedule s = sched;
        s.epsilon = eps;
        double dt = eps / 20.0;
        long steps = std::lround(opts.horizon / dt);
        int stride = 1;
        if (steps > opts.max_steps_per_run) {
            throw NumericalError("estimate_epsilon_threshold: step budget exceeded at eps = " +
                                 std::to_string(eps));
        }
        if (steps > 400'000) stride = static_cast<int>(steps / 400'000) + 1;
        Trajectory traj = simulate_full(net, part, s, theta0, opts.horizon, dt, stride);
        return verdict(traj, part, opts.tol_sync).converged;
    };

    if (!converged_at(grid.front())) {
        throw NumericalError("estimate_epsilon_threshold: no stable epsilon in grid (smallest " +
                             std::to_string(grid.front()) + " fails)");
    }
    if (converged_at(grid.back())) {
        double res = grid.size() >= 2 ? grid.back() - grid[grid.size() - 2] : grid.back();
        return {grid.back(), res};
    }

    // Bisection over grid indices: lo converges, hi does not.
    std::size_t lo = 0, hi = grid.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (converged_at(grid[mid])) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {grid[lo], grid[hi] - grid[lo]};
}

}  // namespace vibrokit
