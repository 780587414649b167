// The parallel execution policy must reproduce the serial reference bit for bit.

#include "ktmsc/pipeline.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <omp.h>

using namespace ktmsc;
using namespace ktmsc::testing;

namespace {

class ParallelTest : public ::testing::Test {
protected:
    void SetUp() override { omp_set_num_threads(4); }
};

}  // namespace

TEST_F(ParallelTest, SpectralTransforms) {
    Rng rng(1);
    const Tensor3 t = rng.tensor(6, 3, 11);
    const auto s = dft_mode3(t, Exec::serial), p = dft_mode3(t, Exec::parallel);
    for (std::size_t k = 0; k < s.slices.size(); ++k) EXPECT_TRUE(s.slices[k] == p.slices[k]);
    EXPECT_TRUE(idft_mode3(s, Exec::serial) == idft_mode3(s, Exec::parallel));
    EXPECT_TRUE(tnn_prox(t, 0.8, Exec::serial) == tnn_prox(t, 0.8, Exec::parallel));
    EXPECT_EQ(tnn(t, Exec::serial), tnn(t, Exec::parallel));

    const auto fs = tsvd(t, Exec::serial), fp = tsvd(t, Exec::parallel);
    for (std::size_t k = 0; k < fs.S.size(); ++k) {
        EXPECT_TRUE(fs.S[k] == fp.S[k]);
        EXPECT_TRUE(fs.U[k] == fp.U[k]);
        EXPECT_TRUE(fs.V[k] == fp.V[k]);
    }
}

TEST_F(ParallelTest, ColumnProx) {
    Rng rng(2);
    const auto f = factor_kernel(random_psd(rng, 30, 12));
    const MatrixXd z = rng.matrix(30, 30), y = rng.matrix(30, 30);
    EXPECT_TRUE(solve_p(z, y, f, 0.4, 1.3, 1e-10, Exec::serial) == solve_p(z, y, f, 0.4, 1.3, 1e-10, Exec::parallel));
}

TEST_F(ParallelTest, KMeansRestarts) {
    Rng rng(3);
    const MatrixXd pts = rng.matrix(80, 3);
    const auto s = kmeans(pts, 4, 9, 16, Exec::serial), p = kmeans(pts, 4, 9, 16, Exec::parallel);
    EXPECT_EQ(s.assignment.labels, p.assignment.labels);
    EXPECT_EQ(s.inertia, p.inertia);
}

TEST_F(ParallelTest, FullSolveAndPipeline) {
    SynthSpec spec;
    spec.views = parse_view_shapes("12:3,10:2", 2);
    spec.per_cluster = 10;
    spec.noise_sigma = 0.02;
    spec.amplitude = 50.0;
    spec.seed = 5;
    const auto ds = synth_multiview(spec);
    PipelineConfig c;
    c.solver.lambda = 0.1;
    c.runs = 4;
    c.restarts = 6;
    const auto s = run_pipeline(ds, c, Exec::serial), p = run_pipeline(ds, c, Exec::parallel);
    ASSERT_EQ(s.solve.trace.size(), p.solve.trace.size());
    for (std::size_t i = 0; i < s.solve.trace.size(); ++i) {
        EXPECT_EQ(s.solve.trace.records[i].objective, p.solve.trace.records[i].objective);
        EXPECT_EQ(s.solve.trace.records[i].match_error, p.solve.trace.records[i].match_error);
    }
    for (std::size_t v = 0; v < s.solve.Z.size(); ++v) EXPECT_TRUE(s.solve.Z[v] == p.solve.Z[v]);
    EXPECT_TRUE(s.affinity == p.affinity);
    EXPECT_EQ(s.run_labels, p.run_labels);
}
