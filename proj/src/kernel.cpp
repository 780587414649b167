#include "ktmsc/kernel.hpp"

#include "ktmsc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace ktmsc {

namespace {

constexpr double kSymmetryTolerance = 1e-9;

void require_finite(const MatrixXd& x) {
    if (!x.allFinite()) throw ArgumentError("feature matrix contains non-finite values");
}

void require_symmetric(const MatrixXd& k, const char* what) {
    if (k.rows() != k.cols()) throw ArgumentError(std::string(what) + " must be square");
    const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
    if ((k - k.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
        throw ArgumentError(std::string(what) + " is not symmetric");
    }
}

MatrixXd squared_distances(const MatrixXd& x) {
    const VectorXd norms = x.colwise().squaredNorm().transpose();
    MatrixXd d2 = (-2.0 * (x.transpose() * x)).colwise() + norms;
    d2.rowwise() += norms.transpose();
    d2 = d2.cwiseMax(0.0);
    d2.diagonal().setZero();
    return d2;
}

}  // namespace

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::linear: return "linear";
        case KernelKind::gaussian: return "gaussian";
        case KernelKind::precomputed: return "precomputed";
    }
    return "linear";
}

KernelKind kernel_kind_from_string(const std::string& name) {
    if (name == "linear") return KernelKind::linear;
    if (name == "gaussian") return KernelKind::gaussian;
    if (name == "precomputed") return KernelKind::precomputed;
    throw ArgumentError("unknown kernel kind '" + name + "'");
}

double median_pairwise_distance(const MatrixXd& x) {
    const Index n = x.cols();
    if (n < 2) return 1.0;
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index j = 1; j < n; ++j) {
        for (Index i = 0; i < j; ++i) dist.push_back((x.col(i) - x.col(j)).norm());
    }
    const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    double median = *mid;
    if (dist.size() % 2 == 0) {
        median = 0.5 * (median + *std::max_element(dist.begin(), mid));
    }
    return median > 0.0 ? median : 1.0;
}

KernelSpec resolve_kernel(const MatrixXd& x, KernelSpec spec) {
    if (spec.kind == KernelKind::gaussian && !spec.bandwidth) {
        require_finite(x);
        spec.bandwidth = median_pairwise_distance(x);
    }
    return spec;
}

MatrixXd gram_matrix(const MatrixXd& x, const KernelSpec& spec) {
    if (x.cols() < 1) throw ArgumentError("gram_matrix needs at least one sample");
    require_finite(x);
    MatrixXd k;
    switch (spec.kind) {
        case KernelKind::linear:
            k = x.transpose() * x;
            break;
        case KernelKind::gaussian: {
            const double bw = resolve_kernel(x, spec).bandwidth.value();
            if (!(bw > 0.0)) throw ArgumentError("gaussian bandwidth must be positive");
            k = (-squared_distances(x) / (2.0 * bw * bw)).array().exp().matrix();
            break;
        }
        case KernelKind::precomputed:
            require_symmetric(x, "precomputed kernel");
            k = x;
            break;
    }
    return 0.5 * (k + k.transpose());
}

KernelFactor factor_kernel(const MatrixXd& k, double rank_tol) {
    if (!(rank_tol > 0.0)) throw ArgumentError("rank_tol must be positive");
    require_symmetric(k, "kernel matrix");
    KernelFactor factor;
    factor.n = k.rows();
    if (factor.n == 0) return factor;

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(k);
    if (eig.info() != Eigen::Success) throw NumericalError("kernel eigendecomposition failed");
    const VectorXd lambdas = eig.eigenvalues().cwiseMax(0.0);  // ascending
    const double lambda_max = lambdas(lambdas.size() - 1);
    if (!(lambda_max > 0.0)) {
        factor.eigvecs.resize(factor.n, 0);
        return factor;
    }
    Index rank = 0;
    for (Index i = 0; i < lambdas.size(); ++i) {
        if (lambdas(i) > rank_tol * lambda_max) ++rank;
    }
    factor.eigvecs.resize(factor.n, rank);
    factor.sigmas.resize(rank);
    for (Index r = 0; r < rank; ++r) {
        const Index src = lambdas.size() - 1 - r;
        factor.eigvecs.col(r) = eig.eigenvectors().col(src);
        factor.sigmas(r) = std::sqrt(lambdas(src));
    }
    return factor;
}

double h_value(const MatrixXd& p, const KernelFactor& factor) {
    if (p.rows() != factor.n) throw ArgumentError("h_value: P row count does not match kernel size");
    if (factor.rank() == 0) return 0.0;
    const MatrixXd projected = factor.sigmas.asDiagonal() * (factor.eigvecs.transpose() * p);
    return projected.colwise().norm().sum();
}

}  // namespace ktmsc
