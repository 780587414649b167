#include "ktmsc/tensor.hpp"

#include "ktmsc/errors.hpp"

#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <string>

namespace ktmsc {

namespace {

using Complex = std::complex<double>;

void require_positive_dims(Index n1, Index n2, Index n3) {
    if (n1 < 1 || n2 < 1 || n3 < 1) {
        throw ArgumentError("tensor dimensions must be positive, got (" + std::to_string(n1) +
                            ", " + std::to_string(n2) + ", " + std::to_string(n3) + ")");
    }
}

void require_same_dims(const Tensor3& a, const Tensor3& b) {
    if (a.dims() != b.dims()) throw ArgumentError("tensor dimension mismatch");
}

// Fibers are transformed in blocks so that each block owns one FFT plan.
constexpr Index kFiberBlocks = 64;

template <class FiberFn>
void for_each_fiber_block(Exec exec, Index fibers, FiberFn&& fn) {
    const Index blocks = std::min(fibers, kFiberBlocks);
    parallel_for(exec, blocks, [&](Index b) {
        const Index begin = fibers * b / blocks;
        const Index end = fibers * (b + 1) / blocks;
        fn(begin, end);
    });
}

// kissfft cannot plan a length-1 transform, which is the identity anyway.
void fft_fiber(Eigen::FFT<double>& fft, Complex* out, const Complex* in, Index n3, bool inverse) {
    if (n3 == 1) {
        out[0] = in[0];
    } else if (inverse) {
        fft.inv(out, in, n3);
    } else {
        fft.fwd(out, in, n3);
    }
}

// Slice k's mirror under conjugate symmetry of a real tensor's spectrum.
Index mirror(Index k, Index n3) { return k == 0 ? 0 : n3 - k; }

// Slices 0..n3/2 determine the rest of a real tensor's spectrum.
Index independent_slices(Index n3) { return n3 / 2 + 1; }

Eigen::JacobiSVD<MatrixXcd> slice_svd(const MatrixXcd& m, unsigned options, Index slice) {
    Eigen::JacobiSVD<MatrixXcd> svd(m, options);
    if (svd.info() != Eigen::Success || !svd.singularValues().allFinite()) {
        throw NumericalError("SVD failed to converge on Fourier slice " + std::to_string(slice));
    }
    return svd;
}

// Singular values shrink as s * (1 - threshold / s)_+ = (s - threshold)_+.
MatrixXcd thresholded_slice(const MatrixXcd& m, double threshold, Index slice) {
    if (m.size() == 0) return m;
    const auto svd = slice_svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV, slice);
    const VectorXd shrunk = (svd.singularValues().array() - threshold).max(0.0).matrix();
    return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().adjoint();
}

}  // namespace

Tensor3::Tensor3(Index n1, Index n2, Index n3) : dims_{n1, n2, n3} {
    require_positive_dims(n1, n2, n3);
    values_.assign(static_cast<std::size_t>(n1 * n2 * n3), 0.0);
}

Tensor3 Tensor3::from_slices(std::span<const MatrixXd> slices) {
    if (slices.empty()) throw ArgumentError("from_slices needs at least one slice");
    Tensor3 t(slices.front().rows(), slices.front().cols(), static_cast<Index>(slices.size()));
    for (Index k = 0; k < t.n3(); ++k) {
        const auto& s = slices[static_cast<std::size_t>(k)];
        if (s.rows() != t.n1() || s.cols() != t.n2()) {
            throw ArgumentError("frontal slices must share one shape");
        }
        t.slice(k) = s;
    }
    return t;
}

bool Tensor3::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double Tensor3::frobenius_norm() const {
    return Eigen::Map<const VectorXd>(values_.data(), size()).norm();
}

double Tensor3::max_abs() const {
    if (values_.empty()) return 0.0;
    return Eigen::Map<const VectorXd>(values_.data(), size()).cwiseAbs().maxCoeff();
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
    require_same_dims(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
    require_same_dims(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Tensor3& Tensor3::operator*=(double scale) {
    for (double& x : values_) x *= scale;
    return *this;
}

double SpectralSlices::conjugate_symmetry_defect() const {
    const Index n3 = dims[2];
    double defect = 0.0;
    for (Index k = 1; k < n3; ++k) {
        const auto& a = slices[static_cast<std::size_t>(k)];
        const auto& b = slices[static_cast<std::size_t>(n3 - k)];
        defect = std::max(defect, (a - b.conjugate()).cwiseAbs().maxCoeff());
    }
    return defect;
}

MatrixXcd TSVDFactors::s_slice(Index j) const {
    MatrixXcd s = MatrixXcd::Zero(dims[0], dims[1]);
    const auto& sigma = S[static_cast<std::size_t>(j)];
    for (Index i = 0; i < sigma.size(); ++i) s(i, i) = sigma(i);
    return s;
}

SpectralSlices dft_mode3(const Tensor3& t, Exec exec) {
    const Index n1 = t.n1(), n2 = t.n2(), n3 = t.n3();
    SpectralSlices out;
    out.dims = t.dims();
    out.slices.assign(static_cast<std::size_t>(n3), MatrixXcd(n1, n2));
    const Index fibers = n1 * n2;
    for_each_fiber_block(exec, fibers, [&](Index begin, Index end) {
        Eigen::FFT<double> fft;
        std::vector<Complex> in(static_cast<std::size_t>(n3)), spectrum(static_cast<std::size_t>(n3));
        for (Index f = begin; f < end; ++f) {
            const Index i = f % n1, j = f / n1;
            for (Index k = 0; k < n3; ++k) in[static_cast<std::size_t>(k)] = t(i, j, k);
            fft_fiber(fft, spectrum.data(), in.data(), n3, false);
            for (Index k = 0; k < n3; ++k) {
                out.slices[static_cast<std::size_t>(k)](i, j) = spectrum[static_cast<std::size_t>(k)];
            }
        }
    });
    return out;
}

Tensor3 idft_mode3(const SpectralSlices& s, Exec exec) {
    const Index n1 = s.dims[0], n2 = s.dims[1], n3 = s.dims[2];
    require_positive_dims(n1, n2, n3);
    if (static_cast<Index>(s.slices.size()) != n3) {
        throw ArgumentError("spectral slice count does not match n3");
    }
    double scale = 1.0;
    for (const auto& m : s.slices) {
        if (m.rows() != n1 || m.cols() != n2) throw ArgumentError("spectral slice shape mismatch");
        if (m.size() > 0) scale = std::max(scale, m.cwiseAbs().maxCoeff());
    }
    const double tol = kSpectralTolerance * scale;
    if (const double defect = s.conjugate_symmetry_defect(); defect > tol) {
        throw NumericalError("spectral slices violate conjugate symmetry (defect " +
                             std::to_string(defect) + "); not the transform of a real tensor");
    }

    Tensor3 out(n1, n2, n3);
    const Index fibers = n1 * n2;
    std::vector<double> residue(static_cast<std::size_t>(std::min(fibers, kFiberBlocks)), 0.0);
    const Index blocks = std::min(fibers, kFiberBlocks);
    parallel_for(exec, blocks, [&](Index b) {
        const Index begin = fibers * b / blocks;
        const Index end = fibers * (b + 1) / blocks;
        Eigen::FFT<double> fft;
        std::vector<Complex> in(static_cast<std::size_t>(n3)), series(static_cast<std::size_t>(n3));
        double worst = 0.0;
        for (Index f = begin; f < end; ++f) {
            const Index i = f % n1, j = f / n1;
            for (Index k = 0; k < n3; ++k) in[static_cast<std::size_t>(k)] = s.slices[static_cast<std::size_t>(k)](i, j);
            fft_fiber(fft, series.data(), in.data(), n3, true);
            for (Index k = 0; k < n3; ++k) {
                const Complex z = series[static_cast<std::size_t>(k)];
                out(i, j, k) = z.real();
                worst = std::max(worst, std::abs(z.imag()));
            }
        }
        residue[static_cast<std::size_t>(b)] = worst;
    });
    const double worst = *std::max_element(residue.begin(), residue.end());
    if (worst > tol) {
        throw NumericalError("inverse transform left imaginary residue " + std::to_string(worst));
    }
    return out;
}

TSVDFactors tsvd(const Tensor3& t, Exec exec) {
    const SpectralSlices spectrum = dft_mode3(t, exec);
    const Index n3 = t.n3();
    TSVDFactors out;
    out.dims = t.dims();
    out.U.resize(static_cast<std::size_t>(n3));
    out.S.resize(static_cast<std::size_t>(n3));
    out.V.resize(static_cast<std::size_t>(n3));
    parallel_for(exec, n3, [&](Index j) {
        const auto svd = slice_svd(spectrum.slices[static_cast<std::size_t>(j)],
                                   Eigen::ComputeFullU | Eigen::ComputeFullV, j);
        MatrixXcd u = svd.matrixU();
        MatrixXcd v = svd.matrixV();
        // Fix the phase freedom: first nonzero entry of each left singular
        // vector is real nonnegative. The matching right vector absorbs the
        // same phase so the product is unchanged.
        const Index paired = svd.singularValues().size();
        for (Index c = 0; c < u.cols(); ++c) {
            const double floor = 1e-12 * u.col(c).norm();
            for (Index r = 0; r < u.rows(); ++r) {
                if (std::abs(u(r, c)) > floor) {
                    const Complex phase = std::conj(u(r, c)) / std::abs(u(r, c));
                    u.col(c) *= phase;
                    if (c < paired) v.col(c) *= phase;
                    break;
                }
            }
        }
        out.U[static_cast<std::size_t>(j)] = std::move(u);
        out.S[static_cast<std::size_t>(j)] = svd.singularValues();
        out.V[static_cast<std::size_t>(j)] = std::move(v);
    });
    return out;
}

double tnn(const Tensor3& t, Exec exec) {
    const SpectralSlices spectrum = dft_mode3(t, exec);
    const Index n3 = t.n3();
    const Index half = independent_slices(n3);
    std::vector<double> per_slice(static_cast<std::size_t>(half), 0.0);
    parallel_for(exec, half, [&](Index j) {
        const auto svd = slice_svd(spectrum.slices[static_cast<std::size_t>(j)], 0, j);
        per_slice[static_cast<std::size_t>(j)] = svd.singularValues().sum();
    });
    double total = 0.0;
    for (Index j = 0; j < half; ++j) {
        // Mirrored slices are conjugates and share singular values.
        const bool has_mirror = j != 0 && mirror(j, n3) != j;
        total += (has_mirror ? 2.0 : 1.0) * per_slice[static_cast<std::size_t>(j)];
    }
    return total;
}

MatrixXcd svt(const MatrixXcd& m, double threshold) { return thresholded_slice(m, threshold, 0); }

Tensor3 tnn_prox(const Tensor3& f, double threshold, Exec exec) {
    if (!(threshold > 0.0)) throw ArgumentError("tnn_prox threshold must be positive");
    SpectralSlices spectrum = dft_mode3(f, exec);
    const Index n3 = f.n3();
    const Index half = independent_slices(n3);
    parallel_for(exec, half, [&](Index j) {
        auto& slice = spectrum.slices[static_cast<std::size_t>(j)];
        slice = thresholded_slice(slice, threshold, j);
    });
    for (Index j = half; j < n3; ++j) {
        spectrum.slices[static_cast<std::size_t>(j)] =
            spectrum.slices[static_cast<std::size_t>(mirror(j, n3))].conjugate();
    }
    return idft_mode3(spectrum, exec);
}

Tensor3 rotate(std::span<const MatrixXd> views) {
    if (views.empty()) throw ArgumentError("rotate needs at least one view");
    const Index n = views.front().rows();
    for (const auto& z : views) {
        if (z.rows() != n || z.cols() != n) {
            throw ArgumentError("rotate expects square views of identical size");
        }
    }
    const Index v_count = static_cast<Index>(views.size());
    Tensor3 t(n, v_count, n);
    for (Index v = 0; v < v_count; ++v) {
        const auto& z = views[static_cast<std::size_t>(v)];
        for (Index j = 0; j < n; ++j) t.slice(j).col(v) = z.col(j);
    }
    return t;
}

std::vector<MatrixXd> unrotate(const Tensor3& t) {
    if (t.n1() != t.n3()) throw ArgumentError("unrotate expects dims (N, V, N)");
    const Index n = t.n1();
    std::vector<MatrixXd> views(static_cast<std::size_t>(t.n2()), MatrixXd(n, n));
    for (Index v = 0; v < t.n2(); ++v) {
        auto& z = views[static_cast<std::size_t>(v)];
        for (Index j = 0; j < n; ++j) z.col(j) = t.slice(j).col(v);
    }
    return views;
}

}  // namespace ktmsc
