#include "ktmsc/errors.hpp"
#include "ktmsc/kernel.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace ktmsc;
using namespace ktmsc::testing;

TEST(Gram, LinearExamples) {
    EXPECT_TRUE(gram_matrix(MatrixXd::Identity(2, 2), KernelSpec::linear()).isApprox(MatrixXd::Identity(2, 2)));
    MatrixXd x(2, 2);
    x << 1, 2, 0, 0;
    MatrixXd expected(2, 2);
    expected << 1, 2, 2, 4;
    EXPECT_EQ(gram_matrix(x, KernelSpec::linear()), expected);
}

TEST(Gram, GaussianEntries) {
    Rng rng(1);
    const MatrixXd x = rng.matrix(3, 6);
    const double bw = 1.3;
    const MatrixXd k = gram_matrix(x, KernelSpec::gaussian(bw));
    for (Index i = 0; i < 6; ++i) {
        EXPECT_EQ(k(i, i), 1.0);
        for (Index j = 0; j < 6; ++j) {
            const double d2 = (x.col(i) - x.col(j)).squaredNorm();
            EXPECT_NEAR(k(i, j), std::exp(-d2 / (2 * bw * bw)), 1e-15);
            EXPECT_EQ(k(i, j), k(j, i));
        }
    }
}

TEST(Gram, PsdOnSamples) {
    Rng rng(2);
    for (const auto& spec : {KernelSpec::linear(), KernelSpec::gaussian(0.8)}) {
        const MatrixXd k = gram_matrix(rng.matrix(4, 12), spec);
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(k);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8 * eig.eigenvalues().maxCoeff());
    }
}

TEST(Gram, Errors) {
    MatrixXd x = MatrixXd::Ones(2, 3);
    x(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(gram_matrix(x, KernelSpec::linear()), ArgumentError);
    EXPECT_THROW(gram_matrix(MatrixXd::Ones(2, 3), KernelSpec::gaussian(-1.0)), ArgumentError);
    MatrixXd asym = MatrixXd::Identity(3, 3);
    asym(0, 1) = 0.5;
    EXPECT_THROW(gram_matrix(asym, KernelSpec::precomputed()), ArgumentError);
    EXPECT_THROW(gram_matrix(MatrixXd::Ones(2, 3), KernelSpec::precomputed()), ArgumentError);
}

TEST(Gram, MedianHeuristic) {
    MatrixXd x(1, 3);
    x << 0, 1, 3;  // distances 1, 2, 3
    EXPECT_DOUBLE_EQ(median_pairwise_distance(x), 2.0);
    EXPECT_EQ(median_pairwise_distance(MatrixXd::Zero(2, 4)), 1.0);
    EXPECT_EQ(median_pairwise_distance(MatrixXd::Ones(2, 1)), 1.0);
    EXPECT_DOUBLE_EQ(*resolve_kernel(x, KernelSpec::gaussian()).bandwidth, 2.0);
    EXPECT_DOUBLE_EQ(*resolve_kernel(x, KernelSpec::gaussian(0.5)).bandwidth, 0.5);
    EXPECT_FALSE(resolve_kernel(x, KernelSpec::linear()).bandwidth.has_value());
}

TEST(Gram, KindNames) {
    for (auto kind : {KernelKind::linear, KernelKind::gaussian, KernelKind::precomputed}) {
        EXPECT_EQ(kernel_kind_from_string(to_string(kind)), kind);
    }
    EXPECT_THROW(kernel_kind_from_string("polynomial"), ArgumentError);
}

TEST(Factor, Examples) {
    const auto id = factor_kernel(MatrixXd::Identity(3, 3));
    EXPECT_EQ(id.rank(), 3);
    EXPECT_LT((id.sigmas.array() - 1.0).abs().maxCoeff(), 1e-14);

    const auto zero = factor_kernel(MatrixXd::Zero(3, 3));
    EXPECT_EQ(zero.rank(), 0);
    EXPECT_EQ(zero.n, 3);

    MatrixXd k(2, 2);
    k << 1, 2, 2, 4;
    const auto f = factor_kernel(k);
    ASSERT_EQ(f.rank(), 1);
    EXPECT_NEAR(f.sigmas(0), std::sqrt(5.0), 1e-14);
    const VectorXd v = f.eigvecs.col(0) * (f.eigvecs(0, 0) < 0 ? -1.0 : 1.0);
    EXPECT_NEAR(v(0), 1 / std::sqrt(5.0), 1e-14);
    EXPECT_NEAR(v(1), 2 / std::sqrt(5.0), 1e-14);
}

TEST(Factor, OrthonormalAndReconstructs) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = rng.integer(2, 12);
        const Index r = rng.integer(1, static_cast<int>(n));
        const MatrixXd k = random_psd(rng, n, r);
        const auto f = factor_kernel(k);
        EXPECT_EQ(f.rank(), r);
        EXPECT_LT((f.eigvecs.transpose() * f.eigvecs - MatrixXd::Identity(f.rank(), f.rank())).cwiseAbs().maxCoeff(), 1e-10);
        for (Index i = 1; i < f.rank(); ++i) EXPECT_LE(f.sigmas(i), f.sigmas(i - 1));
        const MatrixXd rec = f.eigvecs * f.sigmas.array().square().matrix().asDiagonal() * f.eigvecs.transpose();
        EXPECT_LE((k - rec).norm(), kDefaultRankTolerance * k.norm() * std::sqrt(static_cast<double>(n)));
    }
}

TEST(Factor, ClampsNegativeNoise) {
    MatrixXd k = MatrixXd::Identity(3, 3);
    k(2, 2) = -1e-12;
    const auto f = factor_kernel(k);
    EXPECT_EQ(f.rank(), 2);
    EXPECT_THROW(factor_kernel(k, 0.0), ArgumentError);
}

TEST(HValue, Examples) {
    const auto f = factor_kernel(MatrixXd::Identity(4, 4));
    EXPECT_EQ(h_value(MatrixXd::Zero(4, 4), f), 0.0);
    EXPECT_NEAR(h_value(MatrixXd::Identity(4, 4), f), 4.0, 1e-14);
    EXPECT_THROW(h_value(MatrixXd::Zero(3, 4), f), ArgumentError);
}

TEST(HValue, LinearKernelEqualsL21OfProduct) {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = rng.integer(2, 10);
        const MatrixXd x = rng.matrix(rng.integer(1, 12), n);
        const MatrixXd p = rng.matrix(n, n);
        const auto f = factor_kernel(gram_matrix(x, KernelSpec::linear()));
        EXPECT_NEAR(h_value(p, f), l21_of_product(x, p), 1e-9);
    }
}

TEST(HValue, HomogeneousAndConvex) {
    Rng rng(5);
    const auto f = factor_kernel(random_psd(rng, 6, 4));
    for (int trial = 0; trial < 50; ++trial) {
        const MatrixXd p = rng.matrix(6, 6);
        const MatrixXd q = rng.matrix(6, 6);
        const double c = rng.uniform(-4, 4);
        EXPECT_NEAR(h_value(c * p, f), std::abs(c) * h_value(p, f), 1e-10 * h_value(p, f));
        EXPECT_LE(h_value(0.5 * (p + q), f), 0.5 * h_value(p, f) + 0.5 * h_value(q, f) + 1e-9);
    }
}
