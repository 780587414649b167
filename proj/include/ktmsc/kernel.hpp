#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>

namespace ktmsc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class KernelKind { linear, gaussian, precomputed };

// Kernel applied to one view. A gaussian spec without a bandwidth resolves
// to the median pairwise distance of the view's samples.
struct KernelSpec {
    KernelKind kind = KernelKind::linear;
    std::optional<double> bandwidth;

    static KernelSpec linear() { return {KernelKind::linear, std::nullopt}; }
    static KernelSpec gaussian(std::optional<double> bw = std::nullopt) {
        return {KernelKind::gaussian, bw};
    }
    static KernelSpec precomputed() { return {KernelKind::precomputed, std::nullopt}; }
};

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Eigen-factorization K = eigvecs * diag(sigmas^2) * eigvecs^T restricted to
/// the numerically nonzero spectrum. sigmas are positive and descending.
struct KernelFactor {
    MatrixXd eigvecs;  // N x rank, orthonormal columns
    VectorXd sigmas;   // length rank
    Index n = 0;

    Index rank() const noexcept { return sigmas.size(); }
};

inline constexpr double kDefaultRankTolerance = 1e-8;

// Median of the pairwise Euclidean distances between the columns of x; 1 when
// fewer than two samples or all samples coincide.
double median_pairwise_distance(const MatrixXd& x);

// Fills in the gaussian bandwidth from the data when unset.
KernelSpec resolve_kernel(const MatrixXd& x, KernelSpec spec);

/// Gram matrix of the columns of x (d x N). For `precomputed`, x is the N x N
/// kernel itself and must be symmetric within 1e-9.
MatrixXd gram_matrix(const MatrixXd& x, const KernelSpec& spec);

KernelFactor factor_kernel(const MatrixXd& k, double rank_tol = kDefaultRankTolerance);

/// Sum over columns p_i of sqrt(p_i^T K p_i), evaluated through the factor:
/// the l2,1 norm of the feature-space residual Psi(X) P.
double h_value(const MatrixXd& p, const KernelFactor& factor);

}  // namespace ktmsc
