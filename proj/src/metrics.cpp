#include "ktmsc/metrics.hpp"

#include "ktmsc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace ktmsc {

namespace {

void require_same_length(std::span<const int> truth, std::span<const int> pred, std::size_t min_len) {
    if (truth.size() != pred.size()) {
        throw ArgumentError("label vectors differ in length (" + std::to_string(truth.size()) + " vs " +
                            std::to_string(pred.size()) + ")");
    }
    if (truth.size() < min_len) {
        throw ArgumentError("label vectors need at least " + std::to_string(min_len) + " entries");
    }
}

std::vector<int> compact(std::span<const int> labels, int& count) {
    std::map<int, int> index;
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) {
        auto [it, inserted] = index.try_emplace(l, static_cast<int>(index.size()));
        out.push_back(it->second);
    }
    count = static_cast<int>(index.size());
    return out;
}

double choose2(std::int64_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

double entropy(const std::vector<std::int64_t>& sizes, double total) {
    double h = 0.0;
    for (auto s : sizes) {
        if (s > 0) {
            const double p = static_cast<double>(s) / total;
            h -= p * std::log(p);
        }
    }
    return h;
}

struct PairCounts {
    double both = 0.0;   // same cluster in truth and prediction
    double truth = 0.0;  // same cluster in truth
    double pred = 0.0;   // same cluster in prediction
    double all = 0.0;
};

PairCounts pair_counts(const ContingencyTable& t) {
    PairCounts c;
    for (Eigen::Index i = 0; i < t.counts.rows(); ++i) {
        for (Eigen::Index j = 0; j < t.counts.cols(); ++j) c.both += choose2(t.counts(i, j));
    }
    for (auto a : t.truth_sizes) c.truth += choose2(a);
    for (auto b : t.pred_sizes) c.pred += choose2(b);
    c.all = choose2(t.total);
    return c;
}

// Each nonempty row and column of the table holds exactly one nonzero cell.
bool same_partition(const ContingencyTable& t) {
    if (t.counts.rows() != t.counts.cols()) return false;
    for (Eigen::Index i = 0; i < t.counts.rows(); ++i) {
        if ((t.counts.row(i).array() > 0).count() != 1) return false;
        if ((t.counts.col(i).array() > 0).count() != 1) return false;
    }
    return true;
}

}  // namespace

ContingencyTable ContingencyTable::build(std::span<const int> truth, std::span<const int> pred) {
    require_same_length(truth, pred, 1);
    int kt = 0, kp = 0;
    const auto t = compact(truth, kt);
    const auto p = compact(pred, kp);
    ContingencyTable table;
    table.counts = decltype(table.counts)::Zero(kt, kp);
    table.truth_sizes.assign(static_cast<std::size_t>(kt), 0);
    table.pred_sizes.assign(static_cast<std::size_t>(kp), 0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        ++table.counts(t[i], p[i]);
        ++table.truth_sizes[static_cast<std::size_t>(t[i])];
        ++table.pred_sizes[static_cast<std::size_t>(p[i])];
    }
    table.total = static_cast<std::int64_t>(t.size());
    return table;
}

double nmi(std::span<const int> truth, std::span<const int> pred, NmiNormalization norm) {
    const auto table = ContingencyTable::build(truth, pred);
    const double n = static_cast<double>(table.total);
    const double hu = entropy(table.truth_sizes, n);
    const double hv = entropy(table.pred_sizes, n);
    if (hu == 0.0 && hv == 0.0) return 1.0;
    if (hu == 0.0 || hv == 0.0) return 0.0;
    double mi = 0.0;
    for (Eigen::Index i = 0; i < table.counts.rows(); ++i) {
        for (Eigen::Index j = 0; j < table.counts.cols(); ++j) {
            const auto nij = table.counts(i, j);
            if (nij == 0) continue;
            const double a = static_cast<double>(table.truth_sizes[static_cast<std::size_t>(i)]);
            const double b = static_cast<double>(table.pred_sizes[static_cast<std::size_t>(j)]);
            mi += static_cast<double>(nij) / n * std::log(n * static_cast<double>(nij) / (a * b));
        }
    }
    double denom = std::sqrt(hu * hv);
    if (norm == NmiNormalization::arithmetic) denom = 0.5 * (hu + hv);
    if (norm == NmiNormalization::max) denom = std::max(hu, hv);
    return std::clamp(mi / denom, 0.0, 1.0);
}

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
    if (cost.cols() != cost.rows()) throw ArgumentError("hungarian expects a square cost matrix");
    const std::size_t n = static_cast<std::size_t>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    const auto c = [&](std::size_t r, std::size_t col) {
        return cost(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(col - 1));
    };
    // Shortest augmenting paths with row/column potentials, O(n^3). Rows and
    // columns are 1-based; column 0 is a sentinel.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t row = 1; row <= n; ++row) {
        match[0] = row;
        std::size_t col0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[col0] = 1;
            const std::size_t r0 = match[col0];
            double delta = inf;
            std::size_t col1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = c(r0, j) - u[r0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = col0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
        } while (match[col0] != 0);
        do {
            const std::size_t col1 = way[col0];
            match[col0] = match[col1];
            col0 = col1;
        } while (col0 != 0);
    }
    std::vector<int> assignment(n, -1);
    for (std::size_t j = 1; j <= n; ++j) {
        if (match[j] > 0) assignment[match[j] - 1] = static_cast<int>(j - 1);
    }
    return assignment;
}

double acc(std::span<const int> truth, std::span<const int> pred) {
    const auto table = ContingencyTable::build(truth, pred);
    const auto size = std::max(table.counts.rows(), table.counts.cols());
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(size, size);
    cost.topLeftCorner(table.counts.rows(), table.counts.cols()) = -table.counts.cast<double>();
    const auto assignment = hungarian(cost);
    double matched = 0.0;
    for (std::size_t r = 0; r < assignment.size(); ++r) matched -= cost(static_cast<Eigen::Index>(r), assignment[r]);
    return matched / static_cast<double>(table.total);
}

double adjusted_rand(std::span<const int> truth, std::span<const int> pred) {
    require_same_length(truth, pred, 2);
    const auto table = ContingencyTable::build(truth, pred);
    const PairCounts c = pair_counts(table);
    const double expected = c.truth * c.pred / c.all;
    const double max_index = 0.5 * (c.truth + c.pred);
    const double denom = max_index - expected;
    if (denom == 0.0) return same_partition(table) ? 1.0 : 0.0;
    return (c.both - expected) / denom;
}

PairwiseScores pairwise_prf(std::span<const int> truth, std::span<const int> pred) {
    require_same_length(truth, pred, 2);
    const PairCounts c = pair_counts(ContingencyTable::build(truth, pred));
    PairwiseScores s;
    s.precision = c.pred > 0.0 ? c.both / c.pred : 1.0;
    s.recall = c.truth > 0.0 ? c.both / c.truth : 1.0;
    const double sum = s.precision + s.recall;
    s.fscore = sum > 0.0 ? 2.0 * s.precision * s.recall / sum : 0.0;
    return s;
}

MetricsReport evaluate(std::span<const int> truth, std::span<const int> pred) {
    MetricsReport r;
    r.nmi = nmi(truth, pred);
    r.acc = acc(truth, pred);
    r.ar = adjusted_rand(truth, pred);
    const auto prf = pairwise_prf(truth, pred);
    r.fscore = prf.fscore;
    r.precision = prf.precision;
    r.recall = prf.recall;
    return r;
}

MetricsSummary evaluate_runs(std::span<const Labels> runs, std::span<const int> truth) {
    if (runs.empty()) throw ArgumentError("evaluate_runs needs at least one run");
    std::vector<MetricsReport> reports;
    reports.reserve(runs.size());
    for (const auto& run : runs) reports.push_back(evaluate(truth, run));

    constexpr double MetricsReport::*fields[] = {&MetricsReport::nmi,    &MetricsReport::acc,
                                                 &MetricsReport::ar,     &MetricsReport::fscore,
                                                 &MetricsReport::precision, &MetricsReport::recall};
    MetricsSummary summary;
    summary.runs = runs.size();
    const double count = static_cast<double>(runs.size());
    for (auto field : fields) {
        double mean = 0.0;
        for (const auto& r : reports) mean += r.*field;
        mean /= count;
        double var = 0.0;
        for (const auto& r : reports) var += (r.*field - mean) * (r.*field - mean);
        summary.mean.*field = mean;
        summary.stddev.*field = std::sqrt(var / count);
    }
    return summary;
}

nlohmann::json to_json(const MetricsReport& report, const std::optional<MetricsReport>& stddev) {
    nlohmann::json j = {{"nmi", report.nmi},       {"acc", report.acc},
                        {"ar", report.ar},         {"fscore", report.fscore},
                        {"precision", report.precision}, {"recall", report.recall}};
    if (stddev) {
        j["nmi_std"] = stddev->nmi;
        j["acc_std"] = stddev->acc;
        j["ar_std"] = stddev->ar;
        j["fscore_std"] = stddev->fscore;
        j["precision_std"] = stddev->precision;
        j["recall_std"] = stddev->recall;
    }
    return j;
}

}  // namespace ktmsc
