#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vibrokit/common.hpp"

namespace vibrokit {

struct WeightedEdge {
    int i = 0;
    int j = 0;
    double weight = 0.0;

    bool operator==(const WeightedEdge&) const = default;
};

/// Weighted undirected oscillator network: symmetric nonnegative coupling
/// matrix with zero diagonal, plus one natural frequency per node (rad/s).
struct OscillatorNetwork {
    Eigen::MatrixXd weights;
    Eigen::VectorXd frequencies;

    int size() const { return static_cast<int>(weights.rows()); }

    /// Throws std::invalid_argument if the stored matrices violate the type
    /// invariants (asymmetry, nonzero diagonal, negative weight, bad sizes).
    void check() const;

    static OscillatorNetwork from_edges(int n, const std::vector<WeightedEdge>& edges,
                                        const Eigen::VectorXd& frequencies);

    std::vector<WeightedEdge> edge_list() const;
};

/// Ordered partition of {0..n-1} into r clusters.
struct ClusterPartition {
    std::vector<std::vector<int>> clusters;

    int num_clusters() const { return static_cast<int>(clusters.size()); }
    int cluster_size(int k) const { return static_cast<int>(clusters[k].size()); }

    /// Cluster index of a node, or -1 if the node is not covered.
    int cluster_of(int node) const;
};

struct FrequencyViolation {
    int cluster = 0;
    int node_a = 0;
    int node_b = 0;
    double freq_a = 0.0;
    double freq_b = 0.0;
};

struct RowSumViolation {
    int cluster = 0;
    int other_cluster = 0;
    int node_a = 0;
    int node_b = 0;
    double sum_a = 0.0;
    double sum_b = 0.0;
};

/// Result of checking whether a partition's synchronization set is invariant
/// under the network flow. Structural defects (bad index sets, disconnected
/// or too-small clusters) are reported separately from the two invariance
/// conditions: equal frequencies within clusters, and equal weighted row
/// sums toward every other cluster.
struct ValidationReport {
    std::vector<std::string> structural_errors;
    std::vector<FrequencyViolation> frequency_violations;
    std::vector<RowSumViolation> row_sum_violations;
    double tolerance = 0.0;

    bool structurally_valid() const { return structural_errors.empty(); }
    bool passed() const {
        return structural_errors.empty() && frequency_violations.empty() &&
               row_sum_violations.empty();
    }
};

ValidationReport validate_invariance(const OscillatorNetwork& net,
                                     const ClusterPartition& part,
                                     double tol = 1e-9);

/// One oriented edge column: +1 at `head`, -1 at `tail` (original node ids).
struct IncidenceEdge {
    int tail = 0;
    int head = 0;
    double weight = 0.0;
    int cluster = -1;  // -1 for inter-cluster edges
    bool in_tree = false;
};

/// Oriented incidence matrices of the network, its spanning tree and their
/// intra/inter split, with rows permuted so nodes of each cluster are
/// contiguous (making the intra blocks block-diagonal). Columns are ordered
/// cluster by cluster; within a cluster the spanning-tree columns come first
/// and the first two of them form a chained pair e2-e1, e3-e2 in the
/// cluster's local node ordering (needed by the lower-triangular dither
/// construction).
struct IncidenceReduction {
    int n = 0;
    int r = 0;

    std::vector<int> node_order;   // permuted row -> original node id
    std::vector<int> row_of_node;  // original node id -> permuted row

    std::vector<int> cluster_sizes;
    std::vector<int> cluster_row_offset;  // first permuted row of each cluster
    std::vector<int> intra_col_offset;    // first B_intra column of each cluster
    std::vector<int> intra_col_count;
    std::vector<int> tree_col_offset;     // first tree column of each cluster

    std::vector<IncidenceEdge> intra_edges;  // B_intra column order
    std::vector<IncidenceEdge> inter_edges;  // B_inter column order
    std::vector<int> inter_tree_cols;        // indices into inter_edges

    Eigen::MatrixXd B_intra, B_inter;          // n x m_intra, n x m_inter
    Eigen::MatrixXd B_hat_intra, B_hat_inter;  // n x (n-r), n x (r-1)
    Eigen::VectorXd w_intra, w_inter;          // diagonal weights per column

    int intra_cols() const { return static_cast<int>(intra_edges.size()); }
    int inter_cols() const { return static_cast<int>(inter_edges.size()); }
    int tree_cols() const { return n - r; }

    Eigen::MatrixXd B() const;
    Eigen::MatrixXd B_hat() const;

    // Per-cluster local blocks (n_k rows).
    Eigen::MatrixXd intra_block(int k) const;
    Eigen::MatrixXd tree_block(int k) const;
    Eigen::VectorXd intra_weights_block(int k) const;

    /// Permute a full state vector into the reduction's row order.
    Eigen::VectorXd permute(const Eigen::VectorXd& values) const;
};

/// Builds the incidence reduction. Throws std::invalid_argument if some
/// cluster subgraph is disconnected or the quotient graph over clusters is
/// disconnected.
IncidenceReduction build_reduction(const OscillatorNetwork& net,
                                   const ClusterPartition& part);

/// Sanity predicate: B W B^T reproduces the weighted graph Laplacian to
/// 1e-10 in the max norm.
bool laplacian_consistency_check(const IncidenceReduction& red,
                                 const OscillatorNetwork& net);

}  // namespace vibrokit
