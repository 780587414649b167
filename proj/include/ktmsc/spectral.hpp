#pragma once

#include "ktmsc/parallel.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace ktmsc {

using Eigen::Index;
using Eigen::MatrixXd;

struct ClusterAssignment {
    std::vector<int> labels;  // each in [0, clusters)
    int clusters = 0;
};

struct KMeansResult {
    ClusterAssignment assignment;
    double inertia = 0.0;
};

inline constexpr int kDefaultRestarts = 30;

// A = (1/V) sum_v (|Z_v| + |Z_v^T|) / 2.
MatrixXd build_affinity(std::span<const MatrixXd> z);

/// Row-normalized top-`clusters` eigenvectors of D^{-1/2} A D^{-1/2}
/// (N x clusters). Zero-degree vertices use D_ii = 1; zero rows stay zero.
MatrixXd spectral_embedding(const MatrixXd& affinity, int clusters);

/// Lloyd's k-means on the rows of `points` with k-means++ seeding. Restart r
/// draws from a generator seeded by (seed, r); the lowest inertia wins, ties
/// going to the lowest restart index.
KMeansResult kmeans(const MatrixXd& points, int clusters, std::uint64_t seed,
                    int restarts = kDefaultRestarts, Exec exec = Exec::parallel);

/// Normalized spectral clustering of a symmetric nonnegative affinity.
ClusterAssignment spectral_cluster(const MatrixXd& affinity, int clusters, std::uint64_t seed,
                                   int restarts = kDefaultRestarts, Exec exec = Exec::parallel);

}  // namespace ktmsc
