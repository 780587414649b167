#include "ktmsc/errors.hpp"
#include "ktmsc/tensor.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace ktmsc;
using namespace ktmsc::testing;

namespace {

Tensor3 diag31() {
    Tensor3 t(2, 2, 1);
    t(0, 0, 0) = 3.0;
    t(1, 1, 0) = 1.0;
    return t;
}

}  // namespace

TEST(Tensor3, LayoutAndArithmetic) {
    Tensor3 t(2, 3, 4);
    t(1, 2, 3) = 5.0;
    EXPECT_EQ(t.slice(3)(1, 2), 5.0);
    EXPECT_EQ(t.values()[1 + 2 * (2 + 3 * 3)], 5.0);
    EXPECT_THROW(Tensor3(0, 1, 1), ArgumentError);
    Tensor3 u = t + t;
    EXPECT_EQ(u(1, 2, 3), 10.0);
    EXPECT_EQ((u - 2.0 * t).max_abs(), 0.0);
    EXPECT_THROW(t += Tensor3(2, 3, 3), ArgumentError);
}

TEST(Dft, LengthOneIsIdentity) {
    Rng rng(1);
    const Tensor3 t = rng.tensor(3, 2, 1);
    const auto s = dft_mode3(t);
    ASSERT_EQ(s.slices.size(), 1u);
    EXPECT_EQ((s.slices[0].real() - t.slice(0)).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(s.slices[0].imag().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dft, ConstantSequence) {
    Rng rng(2);
    const MatrixXd a = rng.matrix(2, 3);
    const std::vector<MatrixXd> slices{a, a};
    const auto s = dft_mode3(Tensor3::from_slices(slices));
    EXPECT_LT((s.slices[0] - 2.0 * a.cast<cd>()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT(s.slices[1].cwiseAbs().maxCoeff(), 1e-15);

    const Tensor3 back = idft_mode3(s);
    EXPECT_LT((back.slice(0) - a).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((back.slice(1) - a).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Dft, MatchesExplicitDftMatrix) {
    Rng rng(3);
    for (Index n3 : {2, 3, 5, 7, 8, 12}) {
        const Tensor3 t = rng.tensor(3, 2, n3);
        const auto s = dft_mode3(t);
        const auto ref = brute_dft(t);
        for (Index k = 0; k < n3; ++k) {
            EXPECT_LT((s.slices[static_cast<std::size_t>(k)] - ref[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff(), 1e-12)
                << "n3=" << n3 << " k=" << k;
        }
    }
}

TEST(Dft, RoundTripAndParseval) {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor3 t = rng.tensor(3, 2, rng.integer(1, 9));
        const auto s = dft_mode3(t);
        EXPECT_LT(max_abs_diff(idft_mode3(s), t), 1e-12 * std::max(1.0, t.max_abs()));

        double spectral = 0.0;
        for (const auto& slice : s.slices) spectral += slice.squaredNorm();
        spectral /= static_cast<double>(t.n3());
        const double direct = t.frobenius_norm() * t.frobenius_norm();
        EXPECT_NEAR(spectral, direct, 1e-10 * direct);
        EXPECT_LT(s.conjugate_symmetry_defect(), 1e-12);
    }
}

TEST(Dft, InverseRejectsBrokenSymmetry) {
    Rng rng(5);
    auto s = dft_mode3(rng.tensor(2, 2, 4));
    s.slices[1](0, 0) += cd(1e-3, 0.0);
    EXPECT_THROW(idft_mode3(s), NumericalError);
}

TEST(Tsvd, MatrixCase) {
    const auto f = tsvd(diag31());
    EXPECT_NEAR(f.S[0](0), 3.0, 1e-15);
    EXPECT_NEAR(f.S[0](1), 1.0, 1e-15);
    EXPECT_LT((f.U[0] - MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((f.V[0] - MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Tsvd, ZeroTensor) {
    const auto f = tsvd(Tensor3(3, 2, 4));
    for (const auto& s : f.S) EXPECT_EQ(s.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Tsvd, ReconstructsSlicesWithOrthonormalFactors) {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor3 t = rng.tensor(4, 3, 5);
        const auto f = tsvd(t);
        const auto ref = brute_dft(t);
        for (Index j = 0; j < 5; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const MatrixXcd rec = f.U[ju] * f.s_slice(j) * f.V[ju].adjoint();
            EXPECT_LT((rec - ref[ju]).cwiseAbs().maxCoeff(), 1e-10);
            EXPECT_LT((f.U[ju].adjoint() * f.U[ju] - MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_LT((f.V[ju].adjoint() * f.V[ju] - MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
            for (Index i = 0; i < f.S[ju].size(); ++i) {
                EXPECT_GE(f.S[ju](i), 0.0);
                if (i > 0) EXPECT_LE(f.S[ju](i), f.S[ju](i - 1));
            }
            // Sign convention: first nonzero entry of each left vector is real and nonnegative.
            for (Index c = 0; c < f.U[ju].cols(); ++c) {
                Index r = 0;
                while (r < 4 && std::abs(f.U[ju](r, c)) < 1e-14) ++r;
                ASSERT_LT(r, 4);
                EXPECT_GE(f.U[ju](r, c).real(), 0.0);
                EXPECT_NEAR(f.U[ju](r, c).imag(), 0.0, 1e-14);
            }
        }
    }
}

TEST(Tnn, KnownValues) {
    EXPECT_EQ(tnn(Tensor3(3, 3, 4)), 0.0);
    EXPECT_NEAR(tnn(diag31()), 4.0, 1e-14);
}

TEST(Tnn, MatchesPerSliceNuclearNorms) {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor3 t = rng.tensor(3, 3, 4);
        EXPECT_NEAR(tnn(t), brute_tnn(t), 1e-9);
    }
}

TEST(Tnn, NormProperties) {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor3 a = rng.tensor(3, 4, 5);
        const Tensor3 b = rng.tensor(3, 4, 5);
        const double c = rng.uniform(-3.0, 3.0);
        EXPECT_GE(tnn(a), 0.0);
        EXPECT_NEAR(tnn(c * a), std::abs(c) * tnn(a), 1e-10 * tnn(a));
        EXPECT_LE(tnn(a + b), tnn(a) + tnn(b) + 1e-10);
    }
}

TEST(TnnProx, MatrixCase) {
    const Tensor3 out = tnn_prox(diag31(), 2.0);
    EXPECT_NEAR(out(0, 0, 0), 1.0, 1e-14);
    EXPECT_NEAR(out(1, 1, 0), 0.0, 1e-14);
    EXPECT_NEAR(out(0, 1, 0), 0.0, 1e-14);
    EXPECT_THROW(tnn_prox(diag31(), 0.0), ArgumentError);
    EXPECT_THROW(tnn_prox(diag31(), -1.0), ArgumentError);
}

TEST(TnnProx, LargeThresholdGivesZero) {
    Rng rng(9);
    const Tensor3 f = rng.tensor(4, 3, 5);
    double top = 0.0;
    for (const auto& s : tsvd(f).S) top = std::max(top, s(0));
    EXPECT_EQ(tnn_prox(f, top).max_abs(), 0.0);
}

TEST(TnnProx, MatchesBruteForce) {
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor3 f = rng.tensor(4, 3, rng.integer(1, 7));
        for (double thr : {0.1, 1.0, 10.0}) {
            EXPECT_LT(max_abs_diff(tnn_prox(f, thr), brute_tnn_prox(f, thr)), 1e-8);
        }
    }
}

TEST(TnnProx, LocallyOptimalForRhoScaledThreshold) {
    Rng rng(11);
    const Tensor3 f = rng.tensor(4, 3, 5);
    const double rho = 1.0;
    const auto obj = [&](const Tensor3& g) {
        const double dist = (g - f).frobenius_norm();
        return tnn(g) + 0.5 * rho * dist * dist;
    };
    const Tensor3 g = tnn_prox(f, 5.0 / rho);
    const double best = obj(g);
    for (int trial = 0; trial < 100; ++trial) {
        Tensor3 d = rng.tensor(4, 3, 5);
        d *= 1e-2 / d.frobenius_norm();
        EXPECT_LE(best, obj(g + d) + 1e-12);
    }
}

TEST(TnnProx, NonexpansiveAndIdentityLimit) {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor3 a = rng.tensor(3, 3, 6);
        const Tensor3 b = rng.tensor(3, 3, 6);
        const double thr = rng.uniform(0.1, 3.0);
        EXPECT_LE((tnn_prox(a, thr) - tnn_prox(b, thr)).frobenius_norm(), (a - b).frobenius_norm() + 1e-12);
        EXPECT_LT((tnn_prox(a, 1e-12) - a).frobenius_norm(), 1e-9);
    }
}

TEST(Svt, MatchesGramOracle) {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const MatrixXcd m = rng.matrix(4, 3).cast<cd>() + cd(0, 1) * rng.matrix(4, 3).cast<cd>();
        EXPECT_LT((svt(m, 0.7) - brute_svt(m, 0.7)).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Rotate, IndexMapAndBijection) {
    const std::vector<MatrixXd> views{MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2)};
    const Tensor3 t = rotate(views);
    EXPECT_EQ(t.dims(), (std::array<Index, 3>{2, 2, 2}));
    EXPECT_EQ(t(0, 0, 0), 1.0);
    EXPECT_EQ(t(1, 0, 1), 1.0);
    EXPECT_EQ(t(0, 0, 1), 0.0);
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j) EXPECT_EQ(t(i, 1, j), 0.0);
    const auto back = unrotate(t);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_TRUE(back[0] == views[0]);
    EXPECT_TRUE(back[1] == views[1]);

    Rng rng(14);
    const std::vector<MatrixXd> random{rng.matrix(5, 5), rng.matrix(5, 5), rng.matrix(5, 5)};
    const Tensor3 r = rotate(random);
    EXPECT_EQ(r(2, 1, 4), random[1](2, 4));
    const auto rb = unrotate(r);
    for (std::size_t v = 0; v < 3; ++v) EXPECT_TRUE(rb[v] == random[v]);

    for (const auto& z : unrotate(Tensor3(3, 2, 3))) EXPECT_EQ(z.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Rotate, Errors) {
    const std::vector<MatrixXd> mismatched{MatrixXd::Zero(2, 2), MatrixXd::Zero(3, 3)};
    EXPECT_THROW(rotate(mismatched), ArgumentError);
    const std::vector<MatrixXd> rect{MatrixXd::Zero(2, 3)};
    EXPECT_THROW(rotate(rect), ArgumentError);
    EXPECT_THROW(rotate(std::span<const MatrixXd>{}), ArgumentError);
    EXPECT_THROW(unrotate(Tensor3(2, 2, 3)), ArgumentError);
}
