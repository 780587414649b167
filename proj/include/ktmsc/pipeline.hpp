#pragma once

#include "ktmsc/admm.hpp"
#include "ktmsc/dataset.hpp"
#include "ktmsc/metrics.hpp"
#include "ktmsc/spectral.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ktmsc {

/// End-to-end settings. JSON keys match the field names.
struct PipelineConfig {
    // One per view. Empty means: the dataset manifest's suggestions, else linear.
    std::vector<KernelSpec> kernels;
    SolverConfig solver;
    // 0 means: number of distinct ground-truth labels.
    int clusters = 0;
    int runs = 10;
    int restarts = kDefaultRestarts;
    std::uint64_t seed = 0;
    std::string output_dir;

    void validate() const;
};

nlohmann::json to_json(const PipelineConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct PipelineResult {
    PipelineConfig resolved;  // kernels, bandwidths and cluster count as used
    SolveResult solve;
    MatrixXd affinity;
    std::vector<Labels> run_labels;
    std::optional<MetricsSummary> metrics;
};

// Kernel specs per view after applying defaults and the median heuristic.
std::vector<KernelSpec> resolve_kernels(const MultiViewDataset& dataset, const PipelineConfig& config);

std::vector<KernelFactor> factor_views(const MultiViewDataset& dataset, std::span<const KernelSpec> kernels,
                                       double rank_tol);

/// Gram matrices, factorization, ADMM, affinity, then `runs` spectral
/// clusterings with seeds seed + run. Metrics are computed when the dataset
/// carries labels.
PipelineResult run_pipeline(const MultiViewDataset& dataset, const PipelineConfig& config,
                            Exec exec = Exec::parallel);

/// Writes labels.csv (one column per run), affinity.csv, trace.csv,
/// metrics.json and resolved_config.json into `dir`.
void write_artifacts(const PipelineResult& result, const std::filesystem::path& dir);

nlohmann::json metrics_json(const PipelineResult& result);

struct SweepRow {
    double lambda = 0.0;
    double nmi = 0.0;
    double acc = 0.0;
    bool argmax = false;
};

/// One pipeline run per lambda; the first row with the highest mean NMI is
/// flagged. Requires labels.
std::vector<SweepRow> sweep_lambda(const MultiViewDataset& dataset, const PipelineConfig& config,
                                   std::span<const double> lambdas, Exec exec = Exec::parallel);

// Columns: lambda,nmi,acc,argmax
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace ktmsc
