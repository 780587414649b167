#include "ktmsc/spectral.hpp"

#include "ktmsc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace ktmsc {

namespace {

constexpr int kMaxLloydIterations = 300;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::mt19937_64 restart_generator(std::uint64_t seed, int restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    return std::mt19937_64(seq);
}

MatrixXd seed_centers(const MatrixXd& points, int k, std::mt19937_64& rng) {
    const Index n = points.rows();
    MatrixXd centers(k, points.cols());
    Index first = static_cast<Index>(uniform01(rng) * static_cast<double>(n));
    first = std::min(first, n - 1);
    centers.row(0) = points.row(first);
    Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Index pick = n - 1;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double acc = 0.0;
            for (Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (acc > target && d2(i) > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = std::min(static_cast<Index>(uniform01(rng) * static_cast<double>(n)), n - 1);
        }
        centers.row(c) = points.row(pick);
        d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
    return centers;
}

KMeansResult lloyd(const MatrixXd& points, MatrixXd centers) {
    const Index n = points.rows();
    const int k = static_cast<int>(centers.rows());
    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    Eigen::VectorXd best_d2(n);
    for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
        bool changed = false;
        for (Index i = 0; i < n; ++i) {
            int best = 0;
            double best_dist = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (points.row(i) - centers.row(c)).squaredNorm();
                if (d < best_dist) {
                    best_dist = d;
                    best = c;
                }
            }
            best_d2(i) = best_dist;
            if (labels[static_cast<std::size_t>(i)] != best) {
                labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        MatrixXd sums = MatrixXd::Zero(k, points.cols());
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            const int c = labels[static_cast<std::size_t>(i)];
            sums.row(c) += points.row(i);
            ++counts[static_cast<std::size_t>(c)];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            } else {
                // Empty cluster: move it onto the worst-fit point.
                Index far = 0;
                best_d2.maxCoeff(&far);
                centers.row(c) = points.row(far);
                best_d2(far) = 0.0;
            }
        }
    }
    KMeansResult result;
    result.inertia = 0.0;
    for (Index i = 0; i < n; ++i) {
        result.inertia += (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    }
    result.assignment.labels = std::move(labels);
    result.assignment.clusters = k;
    return result;
}

}  // namespace

MatrixXd build_affinity(std::span<const MatrixXd> z) {
    if (z.empty()) throw ArgumentError("build_affinity needs at least one view");
    const Index n = z.front().rows();
    MatrixXd a = MatrixXd::Zero(n, n);
    for (const auto& zv : z) {
        if (zv.rows() != n || zv.cols() != n) throw ArgumentError("build_affinity: dimension mismatch");
        const MatrixXd abs_z = zv.cwiseAbs();
        a += 0.5 * (abs_z + abs_z.transpose());
    }
    return a / static_cast<double>(z.size());
}

MatrixXd spectral_embedding(const MatrixXd& affinity, int clusters) {
    const Index n = affinity.rows();
    if (affinity.cols() != n) throw ArgumentError("affinity must be square");
    if (clusters < 1) throw ArgumentError("cluster count must be at least 1");
    if (clusters > n) {
        throw ArgumentError("cluster count " + std::to_string(clusters) + " exceeds sample count " +
                            std::to_string(n));
    }
    if (!affinity.allFinite() || (affinity.array() < 0.0).any()) {
        throw ArgumentError("affinity must be finite and nonnegative");
    }
    Eigen::VectorXd inv_sqrt_degree = affinity.rowwise().sum();
    for (Index i = 0; i < n; ++i) {
        const double d = inv_sqrt_degree(i);
        inv_sqrt_degree(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
    }
    MatrixXd normalized = inv_sqrt_degree.asDiagonal() * affinity * inv_sqrt_degree.asDiagonal();
    normalized = 0.5 * (normalized + normalized.transpose());

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(normalized);
    if (eig.info() != Eigen::Success) throw NumericalError("spectral embedding eigensolver failed");
    // Eigenvalues ascend; the top block is the trailing columns.
    MatrixXd embedding = eig.eigenvectors().rightCols(clusters).rowwise().reverse();
    for (Index i = 0; i < n; ++i) {
        const double norm = embedding.row(i).norm();
        if (norm > 0.0) embedding.row(i) /= norm;
    }
    return embedding;
}

KMeansResult kmeans(const MatrixXd& points, int clusters, std::uint64_t seed, int restarts, Exec exec) {
    if (clusters < 1) throw ArgumentError("cluster count must be at least 1");
    if (clusters > points.rows()) throw ArgumentError("cluster count exceeds number of points");
    if (restarts < 1) throw ArgumentError("restarts must be at least 1");
    std::vector<KMeansResult> runs(static_cast<std::size_t>(restarts));
    parallel_for(exec, restarts, [&](Index r) {
        auto rng = restart_generator(seed, static_cast<int>(r));
        runs[static_cast<std::size_t>(r)] = lloyd(points, seed_centers(points, clusters, rng));
    });
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].inertia < runs[best].inertia) best = r;
    }
    return std::move(runs[best]);
}

ClusterAssignment spectral_cluster(const MatrixXd& affinity, int clusters, std::uint64_t seed,
                                   int restarts, Exec exec) {
    return kmeans(spectral_embedding(affinity, clusters), clusters, seed, restarts, exec).assignment;
}

}  // namespace ktmsc
