#pragma once

#include <Eigen/Dense>

#include "vibrokit/network.hpp"

namespace vibrokit {

/// Linear map expressing every edge phase difference in terms of the
/// spanning-tree differences: B^T = R B_hat^T with R = [[R1, 0], [R2, R3]].
/// R1 is block-diagonal over clusters and its rows for tree edges are an
/// identity pattern.
struct ReductionMatrices {
    Eigen::MatrixXd R1;  // m_intra x (n-r)
    Eigen::MatrixXd R2;  // m_inter x (n-r)
    Eigen::MatrixXd R3;  // m_inter x (r-1)

    Eigen::MatrixXd R() const;
};

/// Computes R1/R2/R3 from the incidence reduction and verifies the identity
/// B^T = R B_hat^T to 1e-10 (throws NumericalError when the pseudoinverse
/// residual exceeds that, which indicates malformed incidence input).
ReductionMatrices compute_R(const IncidenceReduction& red);

/// Intra- and inter-cluster tree phase differences of a full state.
struct ReducedState {
    Eigen::VectorXd x;  // length n-r
    Eigen::VectorXd y;  // length r-1

    /// Copy with every component wrapped to (-pi, pi]. Presentation only;
    /// integration keeps the raw unwrapped values.
    ReducedState wrapped() const;
};

ReducedState reduce_state(const IncidenceReduction& red, const Eigen::VectorXd& theta);

/// Per-cluster synchronization error: max over node pairs in the cluster of
/// the wrapped absolute phase difference.
Eigen::VectorXd lift_error(const Eigen::VectorXd& theta, const ClusterPartition& part);

/// Phase-difference vector fields of the compact model, evaluated from
/// factor matrices precomputed once. The dither sample U is the vector of
/// instantaneous per-directed-edge values u_ij * sin(s), first the forward
/// orientation of every intra column, then the reversed one; time scaling of
/// the dither is the caller's business.
class ReducedDynamics {
public:
    ReducedDynamics(const IncidenceReduction& red, const ReductionMatrices& rm,
                    const OscillatorNetwork& net);

    int x_dim() const { return static_cast<int>(R1_.cols()); }
    int y_dim() const { return static_cast<int>(R3_.cols()); }
    int directed_count() const { return 2 * static_cast<int>(R1_.rows()); }

    Eigen::VectorXd f_intra(const Eigen::VectorXd& x) const;
    Eigen::VectorXd f_inter(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
    Eigen::VectorXd f_ctr(const Eigen::VectorXd& dither_sample, const Eigen::VectorXd& x) const;
    Eigen::VectorXd g(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
    Eigen::VectorXd g_ctr(const Eigen::VectorXd& dither_sample, const Eigen::VectorXd& x) const;

    /// Block of f_inter belonging to cluster k.
    Eigen::VectorXd f_inter_block(int k, const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

    const Eigen::MatrixXd& R1() const { return R1_; }
    const Eigen::MatrixXd& R2() const { return R2_; }
    const Eigen::MatrixXd& R3() const { return R3_; }
    /// Rows of B_hat_intra^T B_inter W_inter for one cluster (the factor in
    /// front of the inter-edge sines in that cluster's f_inter block).
    Eigen::MatrixXd inter_factor_block(int k) const;

    int num_clusters() const { return r_; }
    int tree_offset(int k) const { return tree_col_offset_[k]; }
    int tree_count(int k) const { return cluster_sizes_[k] - 1; }

private:
    Eigen::MatrixXd R1_, R2_, R3_;
    Eigen::MatrixXd F1_;  // B_hat_intra^T B_intra W_intra
    Eigen::MatrixXd F2_;  // B_hat_intra^T B_inter W_inter
    Eigen::MatrixXd G1_;  // B_hat_inter^T B_intra W_intra
    Eigen::MatrixXd G2_;  // B_hat_inter^T B_inter W_inter
    Eigen::MatrixXd Bp_intra_, Bm_intra_;  // B_hat_intra^T [±B_intra]^+
    Eigen::MatrixXd Bp_inter_, Bm_inter_;  // B_hat_inter^T [±B_intra]^+
    Eigen::VectorXd omega_inter_;          // B_hat_inter^T omega (permuted)
    int r_ = 0;
    std::vector<int> tree_col_offset_;
    std::vector<int> cluster_sizes_;
};

}  // namespace vibrokit
