#pragma once

#include <vector>

#include <Eigen/Dense>

#include "vibrokit/common.hpp"

namespace vibrokit {

enum class TransitionMethod { ClosedForm, Numerical };

/// State-transition matrix of the block-diagonal periodic system
/// x' = P_hat * sin(s) * x, anchored at phase s0. Because the generator's
/// direction is constant in time, the closed form
/// Phi(s, s0) = exp((cos s0 - cos s) P_hat) is exact; for strictly
/// triangular generators it reduces to a terminating polynomial. The
/// numerical variant integrates the matrix ODE with RK4 on a fine grid and
/// exists as an independent cross-check.
class TransitionMatrix {
public:
    TransitionMatrix() = default;

    double s0() const { return s0_; }
    TransitionMethod method() const { return method_; }
    int num_blocks() const { return static_cast<int>(generators_.size()); }
    int block_dim(int k) const { return static_cast<int>(generators_[k].rows()); }
    bool block_nilpotent(int k) const { return nilpotent_[k]; }

    Eigen::MatrixXd block(int k, double s) const;
    Eigen::MatrixXd block_inverse(int k, double s) const;
    Eigen::MatrixXd monodromy(int k) const { return block(k, s0_ + kTwoPi); }

    /// Full block-diagonal matrix at phase s.
    Eigen::MatrixXd full(double s) const;
    Eigen::MatrixXd full_inverse(double s) const;
    int total_dim() const;

    friend TransitionMatrix transition_matrix(const std::vector<Eigen::MatrixXd>& P_hat_blocks,
                                              double s0, TransitionMethod method,
                                              int steps_per_period);

private:
    double s0_ = 0.0;
    TransitionMethod method_ = TransitionMethod::ClosedForm;
    std::vector<Eigen::MatrixXd> generators_;
    std::vector<bool> nilpotent_;
    // Numerical representation: knot matrices over one period per block.
    int knots_ = 0;
    std::vector<std::vector<Eigen::MatrixXd>> grid_;

    Eigen::MatrixXd closed_form(int k, double s) const;
    Eigen::MatrixXd numerical(int k, double s) const;
};

TransitionMatrix transition_matrix(const std::vector<Eigen::MatrixXd>& P_hat_blocks, double s0,
                                   TransitionMethod method = TransitionMethod::ClosedForm,
                                   int steps_per_period = 4096);

/// Per-cluster average of Phi^{-1} J Phi over one period by composite
/// trapezoid quadrature (spectrally accurate for these smooth periodic
/// integrands).
std::vector<Eigen::MatrixXd> averaged_J(const std::vector<Eigen::MatrixXd>& J_blocks,
                                        const TransitionMatrix& phi,
                                        int quadrature_points = 4096);

/// Checks that the spectrum of the averaged blocks does not depend on the
/// anchor phase s0 (a similarity consequence of the identity monodromy).
struct SpectrumInvarianceReport {
    std::vector<double> s0_samples;
    // spectra[sample][cluster] sorted lexicographically by (re, im)
    std::vector<std::vector<Eigen::VectorXcd>> spectra;
    std::vector<std::vector<Eigen::MatrixXd>> averaged_blocks;  // per sample
    // robustness[sample][cluster]; NaN where the averaged block is not
    // Hurwitz. Unlike the spectrum these legitimately vary with s0.
    std::vector<std::vector<double>> robustness_values;
    double max_spectrum_deviation = 0.0;
    bool consistent = false;  // deviation <= 1e-6
};

SpectrumInvarianceReport eigenvalue_invariance_check(
    const std::vector<Eigen::MatrixXd>& J_blocks,
    const std::vector<Eigen::MatrixXd>& P_hat_blocks, const std::vector<double>& s0_samples,
    int quadrature_points = 4096);

/// Sorted eigenvalues (by real part, then imaginary) of a real matrix.
Eigen::VectorXcd sorted_spectrum(const Eigen::MatrixXd& m);

/// Scaling-and-squaring matrix exponential (dimensions here are tiny).
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m);

/// Deviation study between the dithered linear system
/// x' = (J + P_hat sin(t/eps)/eps) x and its averaged prediction
/// Phi(t/eps) exp(J_bar t) Phi(0)^{-1} x0, across halvings of eps. First
/// order averaging makes successive deviation ratios approach 2.
struct SweepStudy {
    std::vector<double> epsilons;
    std::vector<double> deviations;  // sup-norm over the horizon
    std::vector<double> ratios;      // deviations[i] / deviations[i+1]
};

SweepStudy averaging_sweep(const std::vector<Eigen::MatrixXd>& J_blocks,
                           const std::vector<Eigen::MatrixXd>& P_hat_blocks, double s0,
                           double eps0, int halvings, double horizon, const Eigen::VectorXd& x0,
                           int steps_per_period = 512);

}  // namespace vibrokit
