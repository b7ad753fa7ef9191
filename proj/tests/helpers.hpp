#pragma once

#include <random>
#include <vector>

#include "vibrokit/network.hpp"

namespace vibrokit::testing {

/// Seeded random clustered network with connected intra subgraphs and
/// uniform all-to-all inter blocks (which satisfy the invariance conditions
/// by construction): per-cluster equal frequencies, random intra trees plus
/// extra chords.
struct RandomNetwork {
    OscillatorNetwork net;
    ClusterPartition part;
};

inline RandomNetwork random_clustered_network(std::uint64_t seed, int min_clusters = 2,
                                              int max_clusters = 4, int min_size = 2,
                                              int max_size = 8) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> cluster_count(min_clusters, max_clusters);
    std::uniform_int_distribution<int> cluster_size(min_size, max_size);
    std::uniform_real_distribution<double> weight(0.5, 2.0);
    std::uniform_real_distribution<double> inter_weight(0.05, 0.3);
    std::uniform_real_distribution<double> freq(-2.0, 2.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    const int r = cluster_count(rng);
    std::vector<int> sizes(r);
    int n = 0;
    for (int k = 0; k < r; ++k) {
        sizes[k] = cluster_size(rng);
        n += sizes[k];
    }

    ClusterPartition part;
    int next = 0;
    for (int k = 0; k < r; ++k) {
        std::vector<int> cluster;
        for (int i = 0; i < sizes[k]; ++i) cluster.push_back(next++);
        part.clusters.push_back(cluster);
    }

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd omega(n);
    for (int k = 0; k < r; ++k) {
        const auto& c = part.clusters[k];
        const double f = freq(rng);
        for (int v : c) omega(v) = f;
        // random spanning tree: attach each node to a random earlier one
        for (std::size_t i = 1; i < c.size(); ++i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            const int a = c[pick(rng)], b = c[i];
            const double wt = weight(rng);
            w(a, b) = wt;
            w(b, a) = wt;
        }
        for (std::size_t i = 0; i < c.size(); ++i) {
            for (std::size_t j = i + 1; j < c.size(); ++j) {
                if (w(c[i], c[j]) == 0.0 && coin(rng) < 0.4) {
                    const double wt = weight(rng);
                    w(c[i], c[j]) = wt;
                    w(c[j], c[i]) = wt;
                }
            }
        }
    }
    for (int k = 0; k < r; ++k) {
        for (int l = k + 1; l < r; ++l) {
            const double wt = inter_weight(rng);
            for (int a : part.clusters[k]) {
                for (int b : part.clusters[l]) {
                    w(a, b) = wt;
                    w(b, a) = wt;
                }
            }
        }
    }

    OscillatorNetwork net{w, omega};
    net.check();
    return {net, part};
}

/// Complete graph on `ids` with a uniform weight.
inline void add_complete_cluster(Eigen::MatrixXd& w, const std::vector<int>& ids, double weight) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            w(ids[i], ids[j]) = weight;
            w(ids[j], ids[i]) = weight;
        }
    }
}

}  // namespace vibrokit::testing
