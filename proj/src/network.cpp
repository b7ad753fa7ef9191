#include "vibrokit/network.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

namespace vibrokit {

void OscillatorNetwork::check() const {
    const int n = size();
    if (weights.cols() != n) {
        throw std::invalid_argument("network: weight matrix must be square");
    }
    if (frequencies.size() != n) {
        throw std::invalid_argument("network: frequency vector length must match node count");
    }
    for (int i = 0; i < n; ++i) {
        if (weights(i, i) != 0.0) {
            throw std::invalid_argument("network: diagonal weight must be zero at node " +
                                        std::to_string(i + 1));
        }
        for (int j = i + 1; j < n; ++j) {
            if (weights(i, j) != weights(j, i)) {
                throw std::invalid_argument("network: weights must be symmetric, mismatch at (" +
                                            std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
            }
            if (weights(i, j) < 0.0) {
                throw std::invalid_argument("network: negative weight at (" + std::to_string(i + 1) +
                                            "," + std::to_string(j + 1) + ")");
            }
        }
    }
    if (!weights.allFinite() || !frequencies.allFinite()) {
        throw std::invalid_argument("network: non-finite entries");
    }
}

OscillatorNetwork OscillatorNetwork::from_edges(int n, const std::vector<WeightedEdge>& edges,
                                                const Eigen::VectorXd& frequencies) {
    OscillatorNetwork net;
    net.weights = Eigen::MatrixXd::Zero(n, n);
    net.frequencies = frequencies;
    for (const auto& e : edges) {
        if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n || e.i == e.j) {
            throw std::invalid_argument("network: edge endpoints out of range");
        }
        net.weights(e.i, e.j) = e.weight;
        net.weights(e.j, e.i) = e.weight;
    }
    net.check();
    return net;
}

std::vector<WeightedEdge> OscillatorNetwork::edge_list() const {
    std::vector<WeightedEdge> edges;
    for (int i = 0; i < size(); ++i) {
        for (int j = i + 1; j < size(); ++j) {
            if (weights(i, j) > 0.0) edges.push_back({i, j, weights(i, j)});
        }
    }
    return edges;
}

int ClusterPartition::cluster_of(int node) const {
    for (int k = 0; k < num_clusters(); ++k) {
        for (int v : clusters[k]) {
            if (v == node) return k;
        }
    }
    return -1;
}

namespace {

// Connectivity of the subgraph induced on `nodes` (positive weights only).
bool subgraph_connected(const Eigen::MatrixXd& w, const std::vector<int>& nodes) {
    if (nodes.empty()) return false;
    std::set<int> pending(nodes.begin() + 1, nodes.end());
    std::deque<int> queue{nodes.front()};
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (auto it = pending.begin(); it != pending.end();) {
            if (w(u, *it) > 0.0) {
                queue.push_back(*it);
                it = pending.erase(it);
            } else {
                ++it;
            }
        }
    }
    return pending.empty();
}

}  // namespace

ValidationReport validate_invariance(const OscillatorNetwork& net, const ClusterPartition& part,
                                     double tol) {
    net.check();
    ValidationReport report;
    report.tolerance = tol;

    const int n = net.size();
    const int r = part.num_clusters();
    std::vector<int> owner(n, -1);

    if (r == 0) {
        report.structural_errors.push_back("partition has no clusters");
        return report;
    }
    for (int k = 0; k < r; ++k) {
        const auto& c = part.clusters[k];
        if (c.empty()) {
            report.structural_errors.push_back("cluster " + std::to_string(k + 1) + " is empty");
            continue;
        }
        if (c.size() == 1) {
            report.structural_errors.push_back("cluster " + std::to_string(k + 1) +
                                               " is a singleton (need at least 2 nodes)");
        }
        for (int v : c) {
            if (v < 0 || v >= n) {
                report.structural_errors.push_back("cluster " + std::to_string(k + 1) +
                                                   " references node " + std::to_string(v + 1) +
                                                   " outside 1.." + std::to_string(n));
            } else if (owner[v] != -1) {
                report.structural_errors.push_back("node " + std::to_string(v + 1) +
                                                   " appears in clusters " +
                                                   std::to_string(owner[v] + 1) + " and " +
                                                   std::to_string(k + 1));
            } else {
                owner[v] = k;
            }
        }
    }
    for (int v = 0; v < n; ++v) {
        if (owner[v] == -1) {
            report.structural_errors.push_back("node " + std::to_string(v + 1) +
                                               " is not covered by any cluster");
        }
    }
    if (report.structurally_valid()) {
        for (int k = 0; k < r; ++k) {
            if (part.clusters[k].size() >= 2 && !subgraph_connected(net.weights, part.clusters[k])) {
                report.structural_errors.push_back("cluster " + std::to_string(k + 1) +
                                                   " induces a disconnected subgraph");
            }
        }
    }
    if (!report.structurally_valid()) return report;

    // Condition (i): equal natural frequencies within each cluster.
    for (int k = 0; k < r; ++k) {
        const auto& c = part.clusters[k];
        for (std::size_t a = 1; a < c.size(); ++a) {
            double fa = net.frequencies(c[0]);
            double fb = net.frequencies(c[a]);
            if (std::abs(fa - fb) > tol) {
                report.frequency_violations.push_back({k, c[0], c[a], fa, fb});
            }
        }
    }

    // Condition (ii): for every ordered cluster pair (k, l), the weighted row
    // sums toward cluster l agree across the nodes of cluster k.
    for (int k = 0; k < r; ++k) {
        for (int l = 0; l < r; ++l) {
            if (k == l) continue;
            const auto& ck = part.clusters[k];
            const auto& cl = part.clusters[l];
            double ref = 0.0;
            for (int p : cl) ref += net.weights(ck[0], p);
            for (std::size_t a = 1; a < ck.size(); ++a) {
                double s = 0.0;
                for (int p : cl) s += net.weights(ck[a], p);
                if (std::abs(s - ref) > tol) {
                    report.row_sum_violations.push_back({k, l, ck[0], ck[a], ref, s});
                }
            }
        }
    }
    return report;
}

Eigen::MatrixXd IncidenceReduction::B() const {
    Eigen::MatrixXd b(n, intra_cols() + inter_cols());
    b << B_intra, B_inter;
    return b;
}

Eigen::MatrixXd IncidenceReduction::B_hat() const {
    Eigen::MatrixXd b(n, tree_cols() + static_cast<int>(inter_tree_cols.size()));
    b << B_hat_intra, B_hat_inter;
    return b;
}

Eigen::MatrixXd IncidenceReduction::intra_block(int k) const {
    return B_intra.block(cluster_row_offset[k], intra_col_offset[k], cluster_sizes[k],
                         intra_col_count[k]);
}

Eigen::MatrixXd IncidenceReduction::tree_block(int k) const {
    return B_hat_intra.block(cluster_row_offset[k], tree_col_offset[k], cluster_sizes[k],
                             cluster_sizes[k] - 1);
}

Eigen::VectorXd IncidenceReduction::intra_weights_block(int k) const {
    return w_intra.segment(intra_col_offset[k], intra_col_count[k]);
}

Eigen::VectorXd IncidenceReduction::permute(const Eigen::VectorXd& values) const {
    Eigen::VectorXd out(n);
    for (int row = 0; row < n; ++row) out(row) = values(node_order[row]);
    return out;
}

namespace {

// Deterministic per-cluster node ordering and spanning tree. The first three
// local nodes are the lexicographically smallest chained pair of edges
// (s1-s2, s2-s3); the rest of the tree grows breadth-first with ascending
// neighbor exploration.
struct ClusterTree {
    std::vector<int> order;                  // local position -> original node
    std::vector<std::pair<int, int>> edges;  // (tail, head) per tree column
};

ClusterTree build_cluster_tree(const Eigen::MatrixXd& w, std::vector<int> nodes, int cluster_idx) {
    std::sort(nodes.begin(), nodes.end());
    const int nk = static_cast<int>(nodes.size());
    ClusterTree tree;

    auto connected = [&](int a, int b) { return w(a, b) > 0.0; };

    if (nk == 2) {
        if (!connected(nodes[0], nodes[1])) {
            throw std::invalid_argument("cluster " + std::to_string(cluster_idx + 1) +
                                        " subgraph is disconnected");
        }
        tree.order = nodes;
        tree.edges.emplace_back(nodes[0], nodes[1]);
        return tree;
    }

    // Lexicographically smallest (s1, s2, s3) with edges {s1,s2} and {s2,s3}.
    int s1 = -1, s2 = -1, s3 = -1;
    for (int a : nodes) {
        for (int b : nodes) {
            if (b == a || !connected(a, b)) continue;
            for (int c : nodes) {
                if (c == a || c == b || !connected(b, c)) continue;
                s1 = a;
                s2 = b;
                s3 = c;
                break;
            }
            if (s1 != -1) break;
        }
        if (s1 != -1) break;
    }
    if (s1 == -1) {
        throw std::invalid_argument("cluster " + std::to_string(cluster_idx + 1) +
                                    " subgraph is disconnected");
    }

    tree.order = {s1, s2, s3};
    tree.edges.emplace_back(s1, s2);
    tree.edges.emplace_back(s2, s3);

    std::set<int> visited{s1, s2, s3};
    std::deque<int> queue{s1, s2, s3};
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : nodes) {
            if (visited.count(v) || !connected(u, v)) continue;
            visited.insert(v);
            queue.push_back(v);
            tree.order.push_back(v);
            // Orientation of later tree columns follows the global rule:
            // smaller id is the tail.
            tree.edges.emplace_back(std::min(u, v), std::max(u, v));
        }
    }
    if (static_cast<int>(tree.order.size()) != nk) {
        throw std::invalid_argument("cluster " + std::to_string(cluster_idx + 1) +
                                    " subgraph is disconnected");
    }
    return tree;
}

}  // namespace

IncidenceReduction build_reduction(const OscillatorNetwork& net, const ClusterPartition& part) {
    net.check();
    const int n = net.size();
    const int r = part.num_clusters();
    {
        std::vector<int> seen(n, 0);
        for (const auto& c : part.clusters) {
            if (c.size() < 2) throw std::invalid_argument("reduction: every cluster needs >= 2 nodes");
            for (int v : c) {
                if (v < 0 || v >= n || seen[v]++) {
                    throw std::invalid_argument("reduction: partition must cover each node exactly once");
                }
            }
        }
        if (std::accumulate(seen.begin(), seen.end(), 0) != n) {
            throw std::invalid_argument("reduction: partition must cover each node exactly once");
        }
    }

    IncidenceReduction red;
    red.n = n;
    red.r = r;
    red.row_of_node.assign(n, -1);
    red.cluster_sizes.resize(r);
    red.cluster_row_offset.resize(r);
    red.intra_col_offset.resize(r);
    red.intra_col_count.resize(r);
    red.tree_col_offset.resize(r);

    std::vector<int> cluster_of(n, -1);
    for (int k = 0; k < r; ++k) {
        for (int v : part.clusters[k]) cluster_of[v] = k;
    }

    int row = 0;
    int tree_col = 0;
    for (int k = 0; k < r; ++k) {
        ClusterTree tree = build_cluster_tree(net.weights, part.clusters[k], k);
        const int nk = static_cast<int>(tree.order.size());
        red.cluster_sizes[k] = nk;
        red.cluster_row_offset[k] = row;
        red.tree_col_offset[k] = tree_col;
        for (int v : tree.order) {
            red.node_order.push_back(v);
            red.row_of_node[v] = row++;
        }
        red.intra_col_offset[k] = static_cast<int>(red.intra_edges.size());

        std::set<std::pair<int, int>> tree_set;
        for (auto [tail, head] : tree.edges) {
            red.intra_edges.push_back({tail, head, net.weights(tail, head), k, true});
            tree_set.insert({std::min(tail, head), std::max(tail, head)});
            ++tree_col;
        }
        // Chords follow in ascending (i, j) order, oriented small -> large.
        std::vector<int> sorted_nodes = part.clusters[k];
        std::sort(sorted_nodes.begin(), sorted_nodes.end());
        for (std::size_t a = 0; a < sorted_nodes.size(); ++a) {
            for (std::size_t b = a + 1; b < sorted_nodes.size(); ++b) {
                int i = sorted_nodes[a], j = sorted_nodes[b];
                if (net.weights(i, j) > 0.0 && !tree_set.count({i, j})) {
                    red.intra_edges.push_back({i, j, net.weights(i, j), k, false});
                }
            }
        }
        red.intra_col_count[k] = static_cast<int>(red.intra_edges.size()) - red.intra_col_offset[k];
    }

    // Inter edges in ascending (i, j) order; the quotient spanning tree picks
    // the smallest edge joining two not-yet-connected cluster components.
    std::vector<int> comp(r);
    std::iota(comp.begin(), comp.end(), 0);
    std::function<int(int)> find = [&](int k) { return comp[k] == k ? k : comp[k] = find(comp[k]); };
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (net.weights(i, j) <= 0.0 || cluster_of[i] == cluster_of[j]) continue;
            IncidenceEdge e{i, j, net.weights(i, j), -1, false};
            int a = find(cluster_of[i]), b = find(cluster_of[j]);
            if (a != b) {
                comp[a] = b;
                e.in_tree = true;
                red.inter_tree_cols.push_back(static_cast<int>(red.inter_edges.size()));
            }
            red.inter_edges.push_back(e);
        }
    }
    if (static_cast<int>(red.inter_tree_cols.size()) != r - 1) {
        throw std::invalid_argument("reduction: quotient graph over clusters is disconnected");
    }

    const int m_intra = red.intra_cols();
    const int m_inter = red.inter_cols();
    red.B_intra = Eigen::MatrixXd::Zero(n, m_intra);
    red.B_inter = Eigen::MatrixXd::Zero(n, m_inter);
    red.B_hat_intra = Eigen::MatrixXd::Zero(n, n - r);
    red.B_hat_inter = Eigen::MatrixXd::Zero(n, r - 1);
    red.w_intra.resize(m_intra);
    red.w_inter.resize(m_inter);

    int hat_col = 0;
    for (int c = 0; c < m_intra; ++c) {
        const auto& e = red.intra_edges[c];
        red.B_intra(red.row_of_node[e.head], c) = 1.0;
        red.B_intra(red.row_of_node[e.tail], c) = -1.0;
        red.w_intra(c) = e.weight;
        if (e.in_tree) {
            red.B_hat_intra(red.row_of_node[e.head], hat_col) = 1.0;
            red.B_hat_intra(red.row_of_node[e.tail], hat_col) = -1.0;
            ++hat_col;
        }
    }
    for (int c = 0; c < m_inter; ++c) {
        const auto& e = red.inter_edges[c];
        red.B_inter(red.row_of_node[e.head], c) = 1.0;
        red.B_inter(red.row_of_node[e.tail], c) = -1.0;
        red.w_inter(c) = e.weight;
    }
    for (std::size_t t = 0; t < red.inter_tree_cols.size(); ++t) {
        const auto& e = red.inter_edges[red.inter_tree_cols[t]];
        red.B_hat_inter(red.row_of_node[e.head], static_cast<int>(t)) = 1.0;
        red.B_hat_inter(red.row_of_node[e.tail], static_cast<int>(t)) = -1.0;
    }
    return red;
}

bool laplacian_consistency_check(const IncidenceReduction& red, const OscillatorNetwork& net) {
    const int n = net.size();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a) {
        int i = red.node_order[a];
        for (int b = 0; b < n; ++b) {
            int j = red.node_order[b];
            if (a == b) {
                lap(a, a) = net.weights.row(i).sum();
            } else {
                lap(a, b) = -net.weights(i, j);
            }
        }
    }
    Eigen::MatrixXd b = red.B();
    Eigen::VectorXd w(b.cols());
    w << red.w_intra, red.w_inter;
    Eigen::MatrixXd bwbt = b * w.asDiagonal() * b.transpose();
    return (bwbt - lap).cwiseAbs().maxCoeff() <= 1e-10;
}

}  // namespace vibrokit
