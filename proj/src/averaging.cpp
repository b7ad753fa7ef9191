#include "vibrokit/averaging.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "vibrokit/certify.hpp"

namespace vibrokit {

namespace {

bool strictly_lower(const Eigen::MatrixXd& m, double tol = 1e-12) {
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = i; j < m.cols(); ++j) {
            if (std::abs(m(i, j)) > tol) return false;
        }
    }
    return true;
}

// exp(M) for a nilpotent M: the power series terminates.
Eigen::MatrixXd exp_nilpotent(const Eigen::MatrixXd& m) {
    const int d = static_cast<int>(m.rows());
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(d, d);
    for (int p = 1; p < d; ++p) {
        term = (term * m / static_cast<double>(p)).eval();
        if (term.cwiseAbs().maxCoeff() == 0.0) break;
        acc += term;
    }
    return acc;
}

}  // namespace

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m) {
    const int d = static_cast<int>(m.rows());
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    Eigen::MatrixXd scaled = m;
    if (norm > 0.25) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
        scaled /= std::pow(2.0, squarings);
    }
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(d, d);
    for (int p = 1; p <= 18; ++p) {
        term = (term * scaled / static_cast<double>(p)).eval();
        acc += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) acc = (acc * acc).eval();
    return acc;
}

TransitionMatrix transition_matrix(const std::vector<Eigen::MatrixXd>& P_hat_blocks, double s0,
                                   TransitionMethod method, int steps_per_period) {
    TransitionMatrix phi;
    phi.s0_ = s0;
    phi.method_ = method;
    phi.generators_ = P_hat_blocks;
    for (const auto& p : P_hat_blocks) {
        if (p.rows() != p.cols()) {
            throw std::invalid_argument("transition_matrix: generator blocks must be square");
        }
        phi.nilpotent_.push_back(strictly_lower(p));
    }

    if (method == TransitionMethod::Numerical) {
        if (steps_per_period < 2000) steps_per_period = 2000;
        phi.knots_ = steps_per_period;
        const double h = kTwoPi / steps_per_period;
        for (const auto& p : P_hat_blocks) {
            const int d = static_cast<int>(p.rows());
            std::vector<Eigen::MatrixXd> knots;
            knots.reserve(steps_per_period + 1);
            Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
            knots.push_back(m);
            for (int i = 0; i < steps_per_period; ++i) {
                const double s = s0 + i * h;
                // RK4 on dPhi/ds = sin(s) P_hat Phi
                Eigen::MatrixXd k1 = std::sin(s) * p * m;
                Eigen::MatrixXd k2 = std::sin(s + 0.5 * h) * p * (m + 0.5 * h * k1);
                Eigen::MatrixXd k3 = std::sin(s + 0.5 * h) * p * (m + 0.5 * h * k2);
                Eigen::MatrixXd k4 = std::sin(s + h) * p * (m + h * k3);
                m += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
                knots.push_back(m);
            }
            phi.grid_.push_back(std::move(knots));
        }
    }
    return phi;
}

Eigen::MatrixXd TransitionMatrix::closed_form(int k, double s) const {
    const double c = std::cos(s0_) - std::cos(s);
    const Eigen::MatrixXd m = c * generators_[k];
    return nilpotent_[k] ? exp_nilpotent(m) : matrix_exponential(m);
}

Eigen::MatrixXd TransitionMatrix::numerical(int k, double s) const {
    const double h = kTwoPi / knots_;
    double offset = s - s0_;
    // Reduce into [0, 2pi) and reapply whole periods through the monodromy.
    const double whole = std::floor(offset / kTwoPi);
    offset -= whole * kTwoPi;
    int idx = static_cast<int>(std::floor(offset / h));
    idx = std::clamp(idx, 0, knots_ - 1);

    Eigen::MatrixXd m = grid_[k][idx];
    double s_cur = s0_ + idx * h;
    const double remaining = offset - idx * h;
    if (std::abs(remaining) > 1e-15) {
        const double hh = remaining;
        const auto& p = generators_[k];
        Eigen::MatrixXd k1 = std::sin(s_cur) * p * m;
        Eigen::MatrixXd k2 = std::sin(s_cur + 0.5 * hh) * p * (m + 0.5 * hh * k1);
        Eigen::MatrixXd k3 = std::sin(s_cur + 0.5 * hh) * p * (m + 0.5 * hh * k2);
        Eigen::MatrixXd k4 = std::sin(s_cur + hh) * p * (m + hh * k3);
        m += (hh / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
    }
    if (whole != 0.0) {
        const Eigen::MatrixXd mono = grid_[k][knots_];
        const int reps = static_cast<int>(std::abs(whole));
        Eigen::MatrixXd factor = Eigen::MatrixXd::Identity(m.rows(), m.cols());
        Eigen::MatrixXd base = whole > 0 ? mono : Eigen::MatrixXd(mono.inverse());
        for (int i = 0; i < reps; ++i) factor = (factor * base).eval();
        m = (m * factor).eval();
    }
    return m;
}

Eigen::MatrixXd TransitionMatrix::block(int k, double s) const {
    return method_ == TransitionMethod::ClosedForm ? closed_form(k, s) : numerical(k, s);
}

Eigen::MatrixXd TransitionMatrix::block_inverse(int k, double s) const {
    if (method_ == TransitionMethod::ClosedForm) {
        const double c = std::cos(s0_) - std::cos(s);
        const Eigen::MatrixXd m = -c * generators_[k];
        return nilpotent_[k] ? exp_nilpotent(m) : matrix_exponential(m);
    }
    Eigen::MatrixXd m = numerical(k, s);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) {
        throw NumericalError("transition_matrix: singular sample at s = " + std::to_string(s));
    }
    return lu.inverse();
}

Eigen::MatrixXd TransitionMatrix::full(double s) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(total_dim(), total_dim());
    int off = 0;
    for (int k = 0; k < num_blocks(); ++k) {
        const int d = block_dim(k);
        out.block(off, off, d, d) = block(k, s);
        off += d;
    }
    return out;
}

Eigen::MatrixXd TransitionMatrix::full_inverse(double s) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(total_dim(), total_dim());
    int off = 0;
    for (int k = 0; k < num_blocks(); ++k) {
        const int d = block_dim(k);
        out.block(off, off, d, d) = block_inverse(k, s);
        off += d;
    }
    return out;
}

int TransitionMatrix::total_dim() const {
    int d = 0;
    for (const auto& g : generators_) d += static_cast<int>(g.rows());
    return d;
}

std::vector<Eigen::MatrixXd> averaged_J(const std::vector<Eigen::MatrixXd>& J_blocks,
                                        const TransitionMatrix& phi, int quadrature_points) {
    if (static_cast<int>(J_blocks.size()) != phi.num_blocks()) {
        throw std::invalid_argument("averaged_J: block count mismatch");
    }
    if (quadrature_points < 2) quadrature_points = 2;

    std::vector<Eigen::MatrixXd> out;
    out.reserve(J_blocks.size());
    const double h = kTwoPi / quadrature_points;
    for (int k = 0; k < phi.num_blocks(); ++k) {
        if (J_blocks[k].rows() != phi.block_dim(k)) {
            throw std::invalid_argument("averaged_J: block dimension mismatch");
        }
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(J_blocks[k].rows(), J_blocks[k].cols());
        for (int i = 0; i <= quadrature_points; ++i) {
            const double s = phi.s0() + i * h;
            const double w = (i == 0 || i == quadrature_points) ? 0.5 : 1.0;
            acc += w * (phi.block_inverse(k, s) * J_blocks[k] * phi.block(k, s));
        }
        out.push_back(acc * h / kTwoPi);
    }
    return out;
}

Eigen::VectorXcd sorted_spectrum(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m);
    Eigen::VectorXcd eig = solver.eigenvalues();
    std::vector<std::complex<double>> values(eig.data(), eig.data() + eig.size());
    std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return Eigen::Map<Eigen::VectorXcd>(values.data(), static_cast<long>(values.size()));
}

SpectrumInvarianceReport eigenvalue_invariance_check(
    const std::vector<Eigen::MatrixXd>& J_blocks,
    const std::vector<Eigen::MatrixXd>& P_hat_blocks, const std::vector<double>& s0_samples,
    int quadrature_points) {
    SpectrumInvarianceReport report;
    report.s0_samples = s0_samples;
    for (double s0 : s0_samples) {
        TransitionMatrix phi = transition_matrix(P_hat_blocks, s0);
        auto jbar = averaged_J(J_blocks, phi, quadrature_points);
        std::vector<Eigen::VectorXcd> spectra;
        std::vector<double> robustness_row;
        spectra.reserve(jbar.size());
        for (const auto& b : jbar) {
            spectra.push_back(sorted_spectrum(b));
            robustness_row.push_back(is_hurwitz(b) ? robustness(solve_lyapunov(b))
                                                   : std::nan(""));
        }
        report.averaged_blocks.push_back(std::move(jbar));
        report.spectra.push_back(std::move(spectra));
        report.robustness_values.push_back(std::move(robustness_row));
    }
    for (std::size_t i = 1; i < report.spectra.size(); ++i) {
        for (std::size_t k = 0; k < report.spectra[i].size(); ++k) {
            const double dev =
                (report.spectra[i][k] - report.spectra[0][k]).cwiseAbs().maxCoeff();
            report.max_spectrum_deviation = std::max(report.max_spectrum_deviation, dev);
        }
    }
    report.consistent = report.max_spectrum_deviation <= 1e-6;
    return report;
}

SweepStudy averaging_sweep(const std::vector<Eigen::MatrixXd>& J_blocks,
                           const std::vector<Eigen::MatrixXd>& P_hat_blocks, double s0,
                           double eps0, int halvings, double horizon, const Eigen::VectorXd& x0,
                           int steps_per_period) {
    const int r = static_cast<int>(J_blocks.size());
    int dim = 0;
    for (const auto& b : J_blocks) dim += static_cast<int>(b.rows());
    if (x0.size() != dim) {
        throw std::invalid_argument("averaging_sweep: x0 dimension mismatch");
    }

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(dim, dim);
    int off = 0;
    for (int k = 0; k < r; ++k) {
        const int d = static_cast<int>(J_blocks[k].rows());
        J.block(off, off, d, d) = J_blocks[k];
        P.block(off, off, d, d) = P_hat_blocks[k];
        off += d;
    }

    TransitionMatrix phi = transition_matrix(P_hat_blocks, s0);
    auto jbar_blocks = averaged_J(J_blocks, phi);
    Eigen::MatrixXd jbar = Eigen::MatrixXd::Zero(dim, dim);
    off = 0;
    for (int k = 0; k < r; ++k) {
        const int d = static_cast<int>(J_blocks[k].rows());
        jbar.block(off, off, d, d) = jbar_blocks[k];
        off += d;
    }

    SweepStudy study;
    double eps = eps0;
    for (int level = 0; level <= halvings; ++level) {
        const double dt = kTwoPi * eps / steps_per_period;
        const long steps = std::lround(horizon / dt);
        const long check_every = std::max(1L, steps / 2048);
        Eigen::VectorXd x = x0;
        double deviation = 0.0;
        const Eigen::MatrixXd z0 = phi.full_inverse(0.0) * x0;
        for (long i = 0; i <= steps; ++i) {
            const double t = i * dt;
            if (i % check_every == 0 || i == steps) {
                Eigen::VectorXd pred =
                    phi.full(t / eps) * matrix_exponential(jbar * t) * z0;
                deviation = std::max(deviation, (x - pred).cwiseAbs().maxCoeff());
            }
            if (i == steps) break;
            auto deriv = [&](double tt, const Eigen::VectorXd& xx) -> Eigen::VectorXd {
                return J * xx + (std::sin(tt / eps) / eps) * (P * xx);
            };
            Eigen::VectorXd k1 = deriv(t, x);
            Eigen::VectorXd k2 = deriv(t + 0.5 * dt, x + 0.5 * dt * k1);
            Eigen::VectorXd k3 = deriv(t + 0.5 * dt, x + 0.5 * dt * k2);
            Eigen::VectorXd k4 = deriv(t + dt, x + dt * k3);
            x += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
        }
        study.epsilons.push_back(eps);
        study.deviations.push_back(deviation);
        eps /= 2.0;
    }
    for (std::size_t i = 0; i + 1 < study.deviations.size(); ++i) {
        study.ratios.push_back(study.deviations[i] / study.deviations[i + 1]);
    }
    return study;
}

}  // namespace vibrokit
