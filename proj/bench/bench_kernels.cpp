// Serial reference vs OpenMP execution of the hot kernels.
// Each benchmark takes (size, exec) with exec 0 = serial, 1 = parallel.

#include "ktmsc/pipeline.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace ktmsc;

namespace {

Exec policy(const benchmark::State& state) { return state.range(1) == 0 ? Exec::serial : Exec::parallel; }

MatrixXd gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    MatrixXd m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
}

void BM_TnnProx(benchmark::State& state) {
    const Index n = state.range(0);
    std::vector<MatrixXd> views;
    for (int v = 0; v < 3; ++v) views.push_back(gaussian_matrix(n, n, static_cast<std::uint64_t>(v)));
    const Tensor3 t = rotate(views);
    const Exec exec = policy(state);
    for (auto _ : state) benchmark::DoNotOptimize(tnn_prox(t, 0.5, exec));
}

void BM_SolveP(benchmark::State& state) {
    const Index n = state.range(0);
    const MatrixXd x = gaussian_matrix(n / 2, n, 1);
    const auto factor = factor_kernel(gram_matrix(x, KernelSpec::linear()));
    const MatrixXd z = 0.01 * gaussian_matrix(n, n, 2), y = gaussian_matrix(n, n, 3);
    const Exec exec = policy(state);
    for (auto _ : state) benchmark::DoNotOptimize(solve_p(z, y, factor, 1.0, 0.1, 1e-10, exec));
}

void BM_KMeans(benchmark::State& state) {
    const Index n = state.range(0);
    const MatrixXd pts = gaussian_matrix(n, 5, 4);
    const Exec exec = policy(state);
    for (auto _ : state) benchmark::DoNotOptimize(kmeans(pts, 5, 0, kDefaultRestarts, exec));
}

void BM_Solve(benchmark::State& state) {
    SynthSpec spec;
    spec.per_cluster = static_cast<int>(state.range(0)) / 3;
    spec.views = parse_view_shapes("30:4,40:5", 4);
    spec.noise_sigma = 0.01;
    spec.amplitude = 50.0;
    const auto ds = synth_multiview(spec);
    const auto factors = factor_views(ds, std::vector<KernelSpec>(2, KernelSpec::linear()), kDefaultRankTolerance);
    SolverConfig config;
    config.lambda = 0.1;
    const Exec exec = policy(state);
    for (auto _ : state) benchmark::DoNotOptimize(solve(factors, config, exec));
}

}  // namespace

BENCHMARK(BM_TnnProx)->ArgsProduct({{32, 64, 128}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveP)->ArgsProduct({{64, 128, 256}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KMeans)->ArgsProduct({{500, 2000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Solve)->ArgsProduct({{60, 120}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
