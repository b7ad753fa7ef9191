#include "vibrokit/vibration.hpp"

namespace vibrokit {

void VibrationSchedule::validate_for(const OscillatorNetwork& net,
                                     const ClusterPartition& part) const {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("schedule: epsilon must be positive");
    }
    const int n = net.size();
    for (const auto& [key, u] : amplitudes) {
        auto [i, j] = key;
        if (i < 0 || i >= n || j < 0 || j >= n || i == j) {
            throw std::invalid_argument("schedule: directed edge (" + std::to_string(i + 1) + "," +
                                        std::to_string(j + 1) + ") out of range");
        }
        if (net.weights(i, j) <= 0.0) {
            throw std::invalid_argument("schedule: no connection to vibrate between nodes " +
                                        std::to_string(i + 1) + " and " + std::to_string(j + 1));
        }
        if (u != 0.0 && part.cluster_of(i) != part.cluster_of(j)) {
            throw std::invalid_argument("schedule: nonzero amplitude on inter-cluster edge (" +
                                        std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
        }
    }
}

Eigen::VectorXd directed_amplitudes(const IncidenceReduction& red,
                                    const VibrationSchedule& sched) {
    const int m = red.intra_cols();
    Eigen::VectorXd u(2 * m);
    for (int c = 0; c < m; ++c) {
        const auto& e = red.intra_edges[c];
        u(c) = sched.amplitude(e.head, e.tail);      // forward: head receives
        u(m + c) = sched.amplitude(e.tail, e.head);  // reversed: tail receives
    }
    return u;
}

std::vector<Eigen::MatrixXd> assemble_J(const IncidenceReduction& red,
                                        const ReductionMatrices& rm) {
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(red.r);
    for (int k = 0; k < red.r; ++k) {
        Eigen::MatrixXd bk = red.intra_block(k);
        Eigen::MatrixXd tk = red.tree_block(k);
        Eigen::MatrixXd r1k = rm.R1.block(red.intra_col_offset[k], red.tree_col_offset[k],
                                          bk.cols(), tk.cols());
        blocks.push_back(-tk.transpose() * bk * red.intra_weights_block(k).asDiagonal() * r1k);
    }
    return blocks;
}

std::vector<Eigen::MatrixXd> assemble_P_hat(const IncidenceReduction& red,
                                            const ReductionMatrices& rm,
                                            const VibrationSchedule& sched) {
    for (const auto& [key, u] : sched.amplitudes) {
        auto [i, j] = key;
        bool found = false;
        for (const auto& e : red.intra_edges) {
            if ((e.tail == i && e.head == j) || (e.tail == j && e.head == i)) {
                found = true;
                break;
            }
        }
        if (!found && u != 0.0) {
            throw std::invalid_argument("assemble_P_hat: amplitude on (" + std::to_string(i + 1) +
                                        "," + std::to_string(j + 1) +
                                        ") does not match any intra-cluster edge");
        }
    }

    Eigen::VectorXd amps = directed_amplitudes(red, sched);
    const int m = red.intra_cols();

    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(red.r);
    for (int k = 0; k < red.r; ++k) {
        Eigen::MatrixXd bk = red.intra_block(k);
        Eigen::MatrixXd tk = red.tree_block(k);
        Eigen::MatrixXd r1k = rm.R1.block(red.intra_col_offset[k], red.tree_col_offset[k],
                                          bk.cols(), tk.cols());
        Eigen::MatrixXd bp = bk.cwiseMax(0.0);
        Eigen::MatrixXd bm = (-bk).cwiseMax(0.0);
        Eigen::VectorXd u1 = amps.segment(red.intra_col_offset[k], bk.cols());
        Eigen::VectorXd u2 = amps.segment(m + red.intra_col_offset[k], bk.cols());
        blocks.push_back(-tk.transpose() *
                         (bp * u1.asDiagonal() - bm * u2.asDiagonal()).eval() * r1k);
    }
    return blocks;
}

LinearizedBlocks assemble_linearized(const IncidenceReduction& red, const ReductionMatrices& rm,
                                     const VibrationSchedule& sched) {
    return {assemble_J(red, rm), assemble_P_hat(red, rm, sched)};
}

LowerTriangularDesign design_lower_triangular(const IncidenceReduction& red, int cluster,
                                              double u) {
    if (cluster < 0 || cluster >= red.r) {
        throw std::invalid_argument("design_lower_triangular: cluster index out of range");
    }
    if (red.cluster_sizes[cluster] < 2) {
        throw std::invalid_argument("design_lower_triangular: cluster too small");
    }
    LowerTriangularDesign design;
    design.cluster = cluster;
    design.linearly_inert = red.cluster_sizes[cluster] == 2;

    const auto& first = red.intra_edges[red.intra_col_offset[cluster]];
    design.amplitudes.push_back({{first.head, first.tail}, u});
    design.amplitudes.push_back({{first.tail, first.head}, -u});
    return design;
}

std::vector<bool> is_strictly_lower_triangular(const std::vector<Eigen::MatrixXd>& blocks,
                                               double tol) {
    std::vector<bool> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) {
        bool ok = true;
        for (int i = 0; i < b.rows() && ok; ++i) {
            for (int j = i; j < b.cols(); ++j) {
                if (std::abs(b(i, j)) > tol) {
                    ok = false;
                    break;
                }
            }
        }
        out.push_back(ok);
    }
    return out;
}

}  // namespace vibrokit
