#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vibrokit/averaging.hpp"
#include "vibrokit/network.hpp"
#include "vibrokit/reduction.hpp"
#include "vibrokit/simulate.hpp"
#include "vibrokit/vibration.hpp"

namespace vibrokit {

/// Solves A^T X + X A = -I for a Hurwitz A through the vectorized dense
/// linear system (sizes here stay tiny), symmetrizes the result and checks
/// the residual to 1e-10. Throws NumericalError with a conditioning estimate
/// when the Lyapunov operator is close to singular.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A);

/// Robustness measure 1 / lambda_max(X) of a symmetric positive definite
/// Lyapunov solution. Larger means the synchronized state tolerates larger
/// perturbations.
double robustness(const Eigen::MatrixXd& X);

/// Max real part of the spectrum strictly below -1e-9.
bool is_hurwitz(const Eigen::MatrixXd& m);

enum class GammaMethod { Analytic, Sampled };

struct GammaOptions {
    int sup_samples = 1024;    // phase samples for the analytic sup
    int mc_samples = 10000;    // Monte Carlo samples per source cluster
    std::uint64_t seed = 1234;
};

/// Per-cluster-pair growth bounds gamma[k][l] such that
/// || Phi_k^{-1} f_inter^(k)(Phi z, y) || <= sum_l gamma[k][l] ||z_l||.
/// The analytic method is a provable upper bound built from spectral norms
/// and the unit Lipschitz constant of sine (valid because the invariance
/// conditions make f_inter vanish at x = 0); the sampled method estimates
/// the tight constant from below and never exceeds the analytic value.
Eigen::MatrixXd gamma_bounds(const ReducedDynamics& dyn, const TransitionMatrix& phi,
                             GammaMethod method, const GammaOptions& opts = {});

/// S matrix of the certificate: diagonal robustness-minus-self-interference,
/// nonpositive couplings off the diagonal.
Eigen::MatrixXd build_S(const Eigen::VectorXd& robustness_controlled,
                        const Eigen::MatrixXd& gamma_bar);

struct MMatrixVerdict {
    bool is_m_matrix = false;
    Eigen::VectorXd leading_minors;
    Eigen::VectorXcd spectrum;
    int failing_minor = -1;  // 1-based order of the first nonpositive minor
    std::string reason;
};

/// Z-matrix + positive leading principal minors test, with the spectrum as
/// a secondary witness.
MMatrixVerdict is_m_matrix(const Eigen::MatrixXd& S);

struct EpsilonThreshold {
    double epsilon = 0.0;          // largest grid value with a converged run
    double grid_resolution = 0.0;  // spacing to the next (unstable) grid point
};

struct CertifyOptions {
    double s0 = kPi / 2.0;
    int quadrature_points = 4096;
    GammaMethod gamma_for_S = GammaMethod::Analytic;
    GammaOptions gamma;
    double invariance_tol = 1e-9;
};

/// Everything the stability pipeline produces for one network + schedule.
struct StabilityCertificate {
    std::vector<Eigen::MatrixXd> J_blocks, P_hat_blocks, J_bar_blocks;
    std::vector<Eigen::VectorXcd> J_spectra, J_bar_spectra;
    bool hurwitz_J = false;
    bool hurwitz_J_bar = false;
    std::vector<Eigen::MatrixXd> X_uncontrolled, X_controlled;
    Eigen::VectorXd robustness_uncontrolled, robustness_controlled;
    Eigen::MatrixXd gamma_analytic, gamma_sampled;
    GammaMethod gamma_for_S = GammaMethod::Analytic;
    Eigen::MatrixXd S;
    MMatrixVerdict m_matrix;
    /// Sufficient condition met: averaged blocks Hurwitz and S an M-matrix
    /// (the dither scale must additionally be small enough; see the epsilon
    /// threshold estimate).
    bool certified = false;
    double s0 = 0.0;
    int quadrature_points = 0;
    std::optional<EpsilonThreshold> epsilon_threshold;
};

/// Runs the full pipeline: linearize, transition matrix, average, Lyapunov
/// robustness for both the plain and averaged blocks, growth bounds, S and
/// the M-matrix verdict. Failures are re-thrown with a stage tag.
StabilityCertificate certify(const OscillatorNetwork& net, const ClusterPartition& part,
                             const VibrationSchedule& sched, const CertifyOptions& opts = {});

struct EpsilonSearchOptions {
    double horizon = 200.0;
    double tol_sync = 1e-2;
    std::uint64_t seed = 42;
    double perturbation = 0.1;
    std::vector<double> cluster_phases;
    int max_steps_per_run = 100'000'000;
};

/// Bisects an ascending epsilon grid with direct simulation, returning the
/// largest grid value whose run converges. Throws NumericalError when even
/// the smallest grid epsilon fails to stabilize.
EpsilonThreshold estimate_epsilon_threshold(const OscillatorNetwork& net,
                                            const ClusterPartition& part,
                                            const VibrationSchedule& sched,
                                            const std::vector<double>& eps_grid,
                                            const EpsilonSearchOptions& opts = {});

}  // namespace vibrokit
