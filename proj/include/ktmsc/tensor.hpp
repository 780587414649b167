#pragma once

#include "ktmsc/parallel.hpp"

#include <Eigen/Core>

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace ktmsc {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Dense real third-order tensor of shape n1 x n2 x n3.
///
/// Values are stored frontal slice by frontal slice, each slice column-major,
/// so slice(k) is a zero-copy n1 x n2 Eigen view and the mode-3 fiber
/// (i, j, :) has stride n1 * n2.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(Index n1, Index n2, Index n3);

    static Tensor3 zeros(Index n1, Index n2, Index n3) { return Tensor3(n1, n2, n3); }
    // Builds a tensor from its frontal slices; all slices must share a shape.
    static Tensor3 from_slices(std::span<const MatrixXd> slices);

    Index n1() const noexcept { return dims_[0]; }
    Index n2() const noexcept { return dims_[1]; }
    Index n3() const noexcept { return dims_[2]; }
    const std::array<Index, 3>& dims() const noexcept { return dims_; }
    Index size() const noexcept { return static_cast<Index>(values_.size()); }

    double& operator()(Index i, Index j, Index k) { return values_[offset(i, j, k)]; }
    double operator()(Index i, Index j, Index k) const { return values_[offset(i, j, k)]; }

    Eigen::Map<MatrixXd> slice(Index k) { return {values_.data() + k * n1() * n2(), n1(), n2()}; }
    Eigen::Map<const MatrixXd> slice(Index k) const {
        return {values_.data() + k * n1() * n2(), n1(), n2()};
    }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool all_finite() const;
    double frobenius_norm() const;
    double max_abs() const;

    Tensor3& operator+=(const Tensor3& other);
    Tensor3& operator-=(const Tensor3& other);
    Tensor3& operator*=(double scale);

    friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
    friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
    friend Tensor3 operator*(Tensor3 a, double s) { return a *= s; }
    friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }
    friend bool operator==(const Tensor3& a, const Tensor3& b) {
        return a.dims_ == b.dims_ && a.values_ == b.values_;
    }

private:
    std::size_t offset(Index i, Index j, Index k) const noexcept {
        return static_cast<std::size_t>(i + n1() * (j + n2() * k));
    }

    std::array<Index, 3> dims_{0, 0, 0};
    std::vector<double> values_;
};

/// Mode-3 discrete Fourier transform of a Tensor3: n3 complex n1 x n2 slices.
struct SpectralSlices {
    std::array<Index, 3> dims{0, 0, 0};
    std::vector<MatrixXcd> slices;

    // Largest |slice_k - conj(slice_{n3-k})| over k >= 1.
    double conjugate_symmetry_defect() const;
};

/// t-SVD factors kept in the Fourier domain: slice j of the input's DFT is
/// U[j] * diag(S[j]) * V[j]^H, with U[j] n1 x n1, V[j] n2 x n2 and S[j] holding
/// the min(n1, n2) nonnegative, nonincreasing singular values.
struct TSVDFactors {
    std::array<Index, 3> dims{0, 0, 0};
    std::vector<MatrixXcd> U;
    std::vector<VectorXd> S;
    std::vector<MatrixXcd> V;

    // The f-diagonal n1 x n2 slice built from S[j].
    MatrixXcd s_slice(Index j) const;
};

// Symmetry and imaginary-residue tolerance for idft_mode3, relative to
// max(1, largest magnitude).
inline constexpr double kSpectralTolerance = 1e-9;

SpectralSlices dft_mode3(const Tensor3& t, Exec exec = Exec::parallel);
Tensor3 idft_mode3(const SpectralSlices& s, Exec exec = Exec::parallel);

TSVDFactors tsvd(const Tensor3& t, Exec exec = Exec::parallel);

/// Tensor nuclear norm: the sum of the singular values of every Fourier slice.
double tnn(const Tensor3& t, Exec exec = Exec::parallel);

/// Proximal operator of the tensor nuclear norm. Each Fourier slice is
/// singular-value thresholded by `threshold`; with threshold = n3 / rho this
/// minimizes ||G||_tnn + (rho / 2) ||G - F||_F^2.
Tensor3 tnn_prox(const Tensor3& f, double threshold, Exec exec = Exec::parallel);

/// Stacks V square N x N matrices into an N x V x N tensor with
/// T(i, v, j) = views[v](i, j), so each self-representation column becomes a
/// mode-3 fiber.
Tensor3 rotate(std::span<const MatrixXd> views);
std::vector<MatrixXd> unrotate(const Tensor3& t);

// Single-slice singular value thresholding of a complex matrix.
MatrixXcd svt(const MatrixXcd& m, double threshold);

}  // namespace ktmsc
