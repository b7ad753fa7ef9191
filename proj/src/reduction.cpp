#include "vibrokit/reduction.hpp"

#include <Eigen/QR>

namespace vibrokit {

namespace {

// Moore-Penrose pseudoinverse through a rank-revealing orthogonal
// decomposition; singular directions below 1e-12 of the largest are dropped.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.cols() == 0) {
        return Eigen::MatrixXd::Zero(m.cols(), m.rows());
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(1e-12);
    cod.compute(m);
    return cod.pseudoInverse();
}

}  // namespace

Eigen::MatrixXd ReductionMatrices::R() const {
    const auto m_intra = R1.rows();
    const auto m_inter = R2.rows();
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m_intra + m_inter, R1.cols() + R3.cols());
    r.topLeftCorner(m_intra, R1.cols()) = R1;
    r.bottomLeftCorner(m_inter, R2.cols()) = R2;
    r.bottomRightCorner(m_inter, R3.cols()) = R3;
    return r;
}

ReductionMatrices compute_R(const IncidenceReduction& red) {
    ReductionMatrices rm;
    const int n = red.n;
    const int r = red.r;

    rm.R1 = Eigen::MatrixXd::Zero(red.intra_cols(), red.tree_cols());
    for (int k = 0; k < r; ++k) {
        Eigen::MatrixXd bk = red.intra_block(k);
        Eigen::MatrixXd tk = red.tree_block(k);
        rm.R1.block(red.intra_col_offset[k], red.tree_col_offset[k], bk.cols(), tk.cols()) =
            bk.transpose() * pinv(tk.transpose());
    }

    if (red.inter_cols() > 0) {
        Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd p_inter = eye - red.B_hat_inter * pinv(red.B_hat_inter);
        Eigen::MatrixXd p_intra = eye - red.B_hat_intra * pinv(red.B_hat_intra);
        rm.R2 = red.B_inter.transpose() * pinv(red.B_hat_intra.transpose() * p_inter);
        rm.R3 = red.B_inter.transpose() * pinv(red.B_hat_inter.transpose() * p_intra);
    } else {
        rm.R2.resize(0, red.tree_cols());
        rm.R3.resize(0, r - 1);
    }

    double residual =
        (red.B().transpose() - rm.R() * red.B_hat().transpose()).cwiseAbs().maxCoeff();
    if (residual > 1e-10) {
        throw NumericalError("compute_R: identity B^T = R B_hat^T violated, residual " +
                             std::to_string(residual));
    }
    return rm;
}

ReducedState reduce_state(const IncidenceReduction& red, const Eigen::VectorXd& theta) {
    if (theta.size() != red.n) {
        throw std::invalid_argument("reduce_state: state length mismatch");
    }
    Eigen::VectorXd permuted = red.permute(theta);
    ReducedState s;
    s.x = red.B_hat_intra.transpose() * permuted;
    s.y = red.B_hat_inter.transpose() * permuted;
    return s;
}

ReducedState ReducedState::wrapped() const {
    ReducedState s = *this;
    for (int i = 0; i < s.x.size(); ++i) s.x(i) = wrap_angle(s.x(i));
    for (int i = 0; i < s.y.size(); ++i) s.y(i) = wrap_angle(s.y(i));
    return s;
}

Eigen::VectorXd lift_error(const Eigen::VectorXd& theta, const ClusterPartition& part) {
    Eigen::VectorXd err = Eigen::VectorXd::Zero(part.num_clusters());
    for (int k = 0; k < part.num_clusters(); ++k) {
        const auto& c = part.clusters[k];
        for (std::size_t a = 0; a < c.size(); ++a) {
            for (std::size_t b = a + 1; b < c.size(); ++b) {
                err(k) = std::max(err(k), std::abs(wrap_angle(theta(c[a]) - theta(c[b]))));
            }
        }
    }
    return err;
}

ReducedDynamics::ReducedDynamics(const IncidenceReduction& red, const ReductionMatrices& rm,
                                 const OscillatorNetwork& net) {
    R1_ = rm.R1;
    R2_ = rm.R2;
    R3_ = rm.R3;
    r_ = red.r;
    tree_col_offset_ = red.tree_col_offset;
    cluster_sizes_ = red.cluster_sizes;

    Eigen::MatrixXd bp = red.B_intra.cwiseMax(0.0);
    Eigen::MatrixXd bm = (-red.B_intra).cwiseMax(0.0);

    F1_ = red.B_hat_intra.transpose() * red.B_intra * red.w_intra.asDiagonal();
    F2_ = red.B_hat_intra.transpose() * red.B_inter * red.w_inter.asDiagonal();
    G1_ = red.B_hat_inter.transpose() * red.B_intra * red.w_intra.asDiagonal();
    G2_ = red.B_hat_inter.transpose() * red.B_inter * red.w_inter.asDiagonal();
    Bp_intra_ = red.B_hat_intra.transpose() * bp;
    Bm_intra_ = red.B_hat_intra.transpose() * bm;
    Bp_inter_ = red.B_hat_inter.transpose() * bp;
    Bm_inter_ = red.B_hat_inter.transpose() * bm;
    omega_inter_ = red.B_hat_inter.transpose() * red.permute(net.frequencies);
}

Eigen::VectorXd ReducedDynamics::f_intra(const Eigen::VectorXd& x) const {
    return -F1_ * (R1_ * x).array().sin().matrix();
}

Eigen::VectorXd ReducedDynamics::f_inter(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    if (R2_.rows() == 0) return Eigen::VectorXd::Zero(x_dim());
    return -F2_ * (R2_ * x + R3_ * y).array().sin().matrix();
}

Eigen::VectorXd ReducedDynamics::f_ctr(const Eigen::VectorXd& dither_sample,
                                       const Eigen::VectorXd& x) const {
    const int m = static_cast<int>(R1_.rows());
    if (dither_sample.size() != 2 * m) {
        throw std::invalid_argument("f_ctr: dither sample must cover both edge orientations");
    }
    Eigen::VectorXd s = (R1_ * x).array().sin().matrix();
    return -(Bp_intra_ * dither_sample.head(m).cwiseProduct(s) -
             Bm_intra_ * dither_sample.tail(m).cwiseProduct(s));
}

Eigen::VectorXd ReducedDynamics::g(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    Eigen::VectorXd out = omega_inter_ - G1_ * (R1_ * x).array().sin().matrix();
    if (R2_.rows() > 0) out -= G2_ * (R2_ * x + R3_ * y).array().sin().matrix();
    return out;
}

Eigen::VectorXd ReducedDynamics::g_ctr(const Eigen::VectorXd& dither_sample,
                                       const Eigen::VectorXd& x) const {
    const int m = static_cast<int>(R1_.rows());
    if (dither_sample.size() != 2 * m) {
        throw std::invalid_argument("g_ctr: dither sample must cover both edge orientations");
    }
    Eigen::VectorXd s = (R1_ * x).array().sin().matrix();
    return -(Bp_inter_ * dither_sample.head(m).cwiseProduct(s) -
             Bm_inter_ * dither_sample.tail(m).cwiseProduct(s));
}

Eigen::VectorXd ReducedDynamics::f_inter_block(int k, const Eigen::VectorXd& x,
                                               const Eigen::VectorXd& y) const {
    return f_inter(x, y).segment(tree_col_offset_[k], cluster_sizes_[k] - 1);
}

Eigen::MatrixXd ReducedDynamics::inter_factor_block(int k) const {
    return F2_.middleRows(tree_col_offset_[k], cluster_sizes_[k] - 1);
}

}  // namespace vibrokit
