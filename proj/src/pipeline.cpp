#include "ktmsc/pipeline.hpp"

#include "ktmsc/errors.hpp"

#include <fstream>
#include <ostream>
#include <set>

namespace ktmsc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json kernel_json(const KernelSpec& k) {
    json j = {{"kind", to_string(k.kind)}};
    if (k.bandwidth) j["bandwidth"] = *k.bandwidth;
    return j;
}

KernelSpec kernel_from_json(const json& j) {
    KernelSpec k;
    k.kind = kernel_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("bandwidth") && !j["bandwidth"].is_null()) k.bandwidth = j["bandwidth"].get<double>();
    return k;
}

json solver_json(const SolverConfig& s) {
    return {{"lambda", s.lambda},       {"mu0", s.mu0},         {"rho0", s.rho0},
            {"eta", s.eta},             {"mu_max", s.mu_max},   {"rho_max", s.rho_max},
            {"epsilon", s.epsilon},     {"max_iter", s.max_iter}, {"bisect_tol", s.bisect_tol},
            {"rank_tol", s.rank_tol},   {"seed", s.seed}};
}

template <class T>
void read_key(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ArgumentError(std::string("unknown key '") + key + "' in " + where);
    }
}

SolverConfig solver_from_json(const json& j) {
    reject_unknown(j, {"lambda", "mu0", "rho0", "eta", "mu_max", "rho_max", "epsilon", "max_iter",
                       "bisect_tol", "rank_tol", "seed"},
                   "solver config");
    SolverConfig s;
    read_key(j, "lambda", s.lambda);
    read_key(j, "mu0", s.mu0);
    read_key(j, "rho0", s.rho0);
    read_key(j, "eta", s.eta);
    read_key(j, "mu_max", s.mu_max);
    read_key(j, "rho_max", s.rho_max);
    read_key(j, "epsilon", s.epsilon);
    read_key(j, "max_iter", s.max_iter);
    read_key(j, "bisect_tol", s.bisect_tol);
    read_key(j, "rank_tol", s.rank_tol);
    read_key(j, "seed", s.seed);
    return s;
}

int distinct_count(const Labels& labels) {
    return static_cast<int>(std::set<int>(labels.begin(), labels.end()).size());
}

}  // namespace

void PipelineConfig::validate() const {
    solver.validate();
    if (runs < 1) throw ArgumentError("runs must be at least 1");
    if (restarts < 1) throw ArgumentError("restarts must be at least 1");
    if (clusters < 0) throw ArgumentError("clusters must be positive");
    for (const auto& k : kernels) {
        if (k.kind == KernelKind::gaussian && k.bandwidth && !(*k.bandwidth > 0.0)) {
            throw ArgumentError("gaussian bandwidth must be positive");
        }
    }
}

json to_json(const PipelineConfig& config) {
    json kernels = json::array();
    for (const auto& k : config.kernels) kernels.push_back(kernel_json(k));
    return {{"kernels", kernels},         {"solver", solver_json(config.solver)},
            {"clusters", config.clusters}, {"runs", config.runs},
            {"restarts", config.restarts}, {"seed", config.seed},
            {"output_dir", config.output_dir}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
    reject_unknown(j, {"kernels", "solver", "clusters", "runs", "restarts", "seed", "output_dir"}, "pipeline config");
    PipelineConfig c;
    if (j.contains("kernels")) {
        for (const auto& k : j["kernels"]) c.kernels.push_back(kernel_from_json(k));
    }
    if (j.contains("solver")) c.solver = solver_from_json(j["solver"]);
    read_key(j, "clusters", c.clusters);
    read_key(j, "runs", c.runs);
    read_key(j, "restarts", c.restarts);
    read_key(j, "seed", c.seed);
    read_key(j, "output_dir", c.output_dir);
    c.validate();
    return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ArgumentError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return pipeline_config_from_json(j);
}

std::vector<KernelSpec> resolve_kernels(const MultiViewDataset& dataset, const PipelineConfig& config) {
    std::vector<KernelSpec> kernels = config.kernels;
    if (kernels.empty()) kernels = dataset.kernels;
    if (kernels.empty()) kernels.assign(dataset.views.size(), KernelSpec::linear());
    if (kernels.size() != dataset.views.size()) {
        throw ArgumentError("config lists " + std::to_string(kernels.size()) + " kernels for " +
                            std::to_string(dataset.views.size()) + " views");
    }
    for (std::size_t v = 0; v < kernels.size(); ++v) kernels[v] = resolve_kernel(dataset.views[v], kernels[v]);
    return kernels;
}

std::vector<KernelFactor> factor_views(const MultiViewDataset& dataset, std::span<const KernelSpec> kernels,
                                       double rank_tol) {
    std::vector<KernelFactor> factors;
    factors.reserve(kernels.size());
    for (std::size_t v = 0; v < kernels.size(); ++v) {
        factors.push_back(factor_kernel(gram_matrix(dataset.views[v], kernels[v]), rank_tol));
    }
    return factors;
}

PipelineResult run_pipeline(const MultiViewDataset& dataset, const PipelineConfig& config, Exec exec) {
    config.validate();
    dataset.validate();

    PipelineResult result;
    result.resolved = config;
    result.resolved.kernels = resolve_kernels(dataset, config);
    if (result.resolved.clusters == 0) {
        if (!dataset.labels) throw ArgumentError("clusters must be set when the dataset has no labels");
        result.resolved.clusters = distinct_count(*dataset.labels);
    }

    const auto factors = factor_views(dataset, result.resolved.kernels, config.solver.rank_tol);
    result.solve = solve(factors, config.solver, exec);
    result.affinity = build_affinity(result.solve.Z);

    const MatrixXd embedding = spectral_embedding(result.affinity, result.resolved.clusters);
    result.run_labels.resize(static_cast<std::size_t>(config.runs));
    parallel_for(exec, config.runs, [&](Index run) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(run);
        result.run_labels[static_cast<std::size_t>(run)] =
            kmeans(embedding, result.resolved.clusters, seed, config.restarts, Exec::serial).assignment.labels;
    });
    if (dataset.labels) result.metrics = evaluate_runs(result.run_labels, *dataset.labels);
    return result;
}

json metrics_json(const PipelineResult& result) {
    json j;
    j["labels"] = "labels.csv";
    j["converged"] = result.solve.converged;
    j["iterations"] = result.solve.trace.size();
    j["runs"] = result.run_labels.size();
    if (result.metrics) j["metrics"] = to_json(result.metrics->mean, result.metrics->stddev);
    return j;
}

void write_artifacts(const PipelineResult& result, const fs::path& dir) {
    fs::create_directories(dir);

    const std::size_t n = result.run_labels.empty() ? 0 : result.run_labels.front().size();
    {
        std::ofstream out(dir / "labels.csv");
        for (std::size_t r = 0; r < result.run_labels.size(); ++r) out << (r ? "," : "") << "run_" << r;
        out << '\n';
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t r = 0; r < result.run_labels.size(); ++r) out << (r ? "," : "") << result.run_labels[r][i];
            out << '\n';
        }
    }
    write_csv_matrix(dir / "affinity.csv", result.affinity);
    {
        std::ofstream out(dir / "trace.csv");
        result.solve.trace.write_csv(out);
    }
    std::ofstream(dir / "metrics.json") << metrics_json(result).dump(2) << '\n';
    std::ofstream(dir / "resolved_config.json") << to_json(result.resolved).dump(2) << '\n';
}

std::vector<SweepRow> sweep_lambda(const MultiViewDataset& dataset, const PipelineConfig& config,
                                   std::span<const double> lambdas, Exec exec) {
    if (lambdas.empty()) throw ArgumentError("lambda grid is empty");
    if (!dataset.labels) throw ArgumentError("sweep_lambda needs ground-truth labels");
    std::vector<SweepRow> rows;
    for (double lambda : lambdas) {
        if (!(lambda > 0.0)) throw ArgumentError("lambda values must be positive");
        PipelineConfig point = config;
        point.solver.lambda = lambda;
        const auto result = run_pipeline(dataset, point, exec);
        rows.push_back({lambda, result.metrics->mean.nmi, result.metrics->mean.acc, false});
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].nmi > rows[best].nmi) best = i;
    }
    rows[best].argmax = true;
    return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << "lambda,nmi,acc,argmax\n";
    for (const auto& r : rows) {
        out << format_double(r.lambda) << ',' << format_double(r.nmi) << ',' << format_double(r.acc) << ','
            << (r.argmax ? 1 : 0) << '\n';
    }
}

}  // namespace ktmsc
