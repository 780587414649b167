#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ktmsc {

using Labels = std::vector<int>;

/// Counts of samples per (truth cluster, predicted cluster). Label values are
/// compacted to 0-based indices in order of first appearance.
struct ContingencyTable {
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
    std::vector<std::int64_t> truth_sizes;
    std::vector<std::int64_t> pred_sizes;
    std::int64_t total = 0;

    static ContingencyTable build(std::span<const int> truth, std::span<const int> pred);
};

enum class NmiNormalization { geometric, arithmetic, max };

double nmi(std::span<const int> truth, std::span<const int> pred,
           NmiNormalization norm = NmiNormalization::geometric);
double acc(std::span<const int> truth, std::span<const int> pred);
double adjusted_rand(std::span<const int> truth, std::span<const int> pred);

struct PairwiseScores {
    double precision = 0.0;
    double recall = 0.0;
    double fscore = 0.0;
};

PairwiseScores pairwise_prf(std::span<const int> truth, std::span<const int> pred);

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// algorithm). Returns, for each row, its assigned column.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

struct MetricsReport {
    double nmi = 0.0;
    double acc = 0.0;
    double ar = 0.0;
    double fscore = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

MetricsReport evaluate(std::span<const int> truth, std::span<const int> pred);

struct MetricsSummary {
    MetricsReport mean;
    MetricsReport stddev;  // population standard deviation across runs
    std::size_t runs = 0;
};

MetricsSummary evaluate_runs(std::span<const Labels> runs, std::span<const int> truth);

// {"nmi", "acc", "ar", "fscore", "precision", "recall"} plus "<key>_std"
// entries when a deviation report is given.
nlohmann::json to_json(const MetricsReport& report, const std::optional<MetricsReport>& stddev = std::nullopt);

}  // namespace ktmsc
