#include "ktmsc/dataset.hpp"

#include "ktmsc/errors.hpp"

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace ktmsc {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_double(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size();
}

bool numeric_row(const std::vector<std::string>& cells) {
    double dummy = 0.0;
    for (const auto& c : cells) {
        if (!parse_double(c, dummy)) return false;
    }
    return true;
}

// Numeric rows of a CSV file, skipping an optional header and blank lines.
std::vector<std::vector<double>> read_numeric_rows(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError(DatasetError::Kind::missing_path, "cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_line(line);
        if (first) {
            first = false;
            if (!numeric_row(cells)) continue;  // header
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double x = 0.0;
            if (!parse_double(cells[c], x)) {
                throw DatasetError(DatasetError::Kind::bad_cell,
                                   path.string() + ":" + std::to_string(line_no) + ": column " +
                                       std::to_string(c + 1) + " is not a number ('" + cells[c] + "')");
            }
            row.push_back(x);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw DatasetError(DatasetError::Kind::bad_cell,
                               path.string() + ":" + std::to_string(line_no) + ": expected " +
                                   std::to_string(rows.front().size()) + " columns, found " +
                                   std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

fs::path view_file(const fs::path& dir, Index v) { return dir / ("view_" + std::to_string(v + 1) + ".csv"); }

nlohmann::json kernel_to_json(const KernelSpec& k) {
    nlohmann::json j = {{"kind", to_string(k.kind)}};
    if (k.bandwidth) j["bandwidth"] = *k.bandwidth;
    return j;
}

MatrixXd orthonormal_basis(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd g(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
    }
    Eigen::HouseholderQR<MatrixXd> qr(g);
    return qr.householderQ() * MatrixXd::Identity(rows, cols);
}

}  // namespace

void MultiViewDataset::validate() const {
    if (views.empty()) throw DatasetError(DatasetError::Kind::empty, "dataset has no views");
    const Index n = samples();
    for (std::size_t v = 0; v < views.size(); ++v) {
        if (views[v].cols() != n) {
            throw DatasetError(DatasetError::Kind::inconsistent_samples,
                               "view " + std::to_string(v + 1) + " has " + std::to_string(views[v].cols()) +
                                   " samples, view 1 has " + std::to_string(n));
        }
    }
    if (labels && static_cast<Index>(labels->size()) != n) {
        throw DatasetError(DatasetError::Kind::bad_labels, "labels have " + std::to_string(labels->size()) +
                                                               " entries for " + std::to_string(n) + " samples");
    }
}

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

MatrixXd read_csv_matrix(const fs::path& path) {
    const auto rows = read_numeric_rows(path);
    if (rows.empty()) return MatrixXd(0, 0);
    MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
    return m;
}

void write_csv_matrix(const fs::path& path, const MatrixXd& m, const std::vector<std::string>& header) {
    std::ofstream out(path);
    if (!out) throw DatasetError(DatasetError::Kind::missing_path, "cannot write " + path.string());
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    if (!header.empty()) out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
        out << '\n';
    }
}

std::vector<Labels> read_label_columns(const fs::path& path) {
    const auto rows = read_numeric_rows(path);
    if (rows.empty()) throw DatasetError(DatasetError::Kind::bad_labels, path.string() + " holds no labels");
    std::vector<Labels> columns(rows.front().size());
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            const double x = row[c];
            if (x != std::floor(x)) {
                throw DatasetError(DatasetError::Kind::bad_labels, path.string() + ": label " + format_double(x) +
                                                                       " is not an integer");
            }
            columns[c].push_back(static_cast<int>(x));
        }
    }
    return columns;
}

Labels read_labels(const fs::path& path) {
    auto columns = read_label_columns(path);
    if (columns.size() != 1) {
        throw DatasetError(DatasetError::Kind::bad_labels, path.string() + ": expected one label per line");
    }
    return std::move(columns.front());
}

void write_labels(const fs::path& path, const Labels& labels) {
    std::ofstream out(path);
    if (!out) throw DatasetError(DatasetError::Kind::missing_path, "cannot write " + path.string());
    for (int l : labels) out << l << '\n';
}

MultiViewDataset load_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw DatasetError(DatasetError::Kind::missing_path, "dataset directory not found: " + dir.string());
    }
    MultiViewDataset ds;
    nlohmann::json manifest;
    if (fs::exists(dir / "dataset.json")) {
        std::ifstream in(dir / "dataset.json");
        manifest = nlohmann::json::parse(in);
    }
    for (Index v = 0; fs::exists(view_file(dir, v)); ++v) {
        MatrixXd rows = read_csv_matrix(view_file(dir, v));
        if (rows.size() == 0) {
            throw DatasetError(DatasetError::Kind::empty, view_file(dir, v).string() + " has no data rows");
        }
        ds.views.push_back(rows.transpose());
        ds.names.push_back("view_" + std::to_string(v + 1));
    }
    if (ds.views.empty()) {
        throw DatasetError(DatasetError::Kind::empty, "no view_1.csv found in " + dir.string());
    }
    if (fs::exists(dir / "labels.csv")) ds.labels = read_labels(dir / "labels.csv");

    if (manifest.contains("views")) {
        const auto& mv = manifest["views"];
        for (std::size_t v = 0; v < mv.size() && v < ds.views.size(); ++v) {
            if (mv[v].contains("name")) ds.names[v] = mv[v]["name"].get<std::string>();
            if (mv[v].contains("kernel")) {
                const auto& k = mv[v]["kernel"];
                KernelSpec spec;
                spec.kind = kernel_kind_from_string(k.at("kind").get<std::string>());
                if (k.contains("bandwidth")) spec.bandwidth = k["bandwidth"].get<double>();
                ds.kernels.push_back(spec);
            }
        }
        if (ds.kernels.size() != ds.views.size()) ds.kernels.clear();
    }
    ds.validate();
    return ds;
}

void save_dataset(const MultiViewDataset& dataset, const fs::path& dir) {
    dataset.validate();
    fs::create_directories(dir);
    nlohmann::json manifest;
    manifest["samples"] = dataset.samples();
    manifest["views"] = nlohmann::json::array();
    for (Index v = 0; v < dataset.view_count(); ++v) {
        const auto idx = static_cast<std::size_t>(v);
        write_csv_matrix(view_file(dir, v), dataset.views[idx].transpose());
        nlohmann::json entry = {{"file", view_file(dir, v).filename().string()},
                                {"dims", dataset.views[idx].rows()}};
        entry["name"] = idx < dataset.names.size() ? dataset.names[idx] : "view_" + std::to_string(v + 1);
        if (idx < dataset.kernels.size()) entry["kernel"] = kernel_to_json(dataset.kernels[idx]);
        manifest["views"].push_back(entry);
    }
    if (dataset.labels) {
        write_labels(dir / "labels.csv", *dataset.labels);
        manifest["labels"] = "labels.csv";
    }
    std::ofstream(dir / "dataset.json") << manifest.dump(2) << '\n';
}

std::string to_string(SynthKind kind) {
    return kind == SynthKind::linear_subspaces ? "linear_subspaces" : "nonlinear_rings";
}

SynthKind synth_kind_from_string(const std::string& name) {
    if (name == "linear_subspaces") return SynthKind::linear_subspaces;
    if (name == "nonlinear_rings") return SynthKind::nonlinear_rings;
    throw ArgumentError("unknown synthetic kind '" + name + "'");
}

std::vector<ViewShape> parse_view_shapes(const std::string& spec, Index default_intrinsic) {
    std::vector<ViewShape> shapes;
    std::istringstream in(spec);
    std::string entry;
    while (std::getline(in, entry, ',')) {
        ViewShape shape;
        const auto colon = entry.find(':');
        try {
            shape.ambient_dim = std::stol(entry.substr(0, colon));
            shape.intrinsic_dim = colon == std::string::npos ? default_intrinsic : std::stol(entry.substr(colon + 1));
        } catch (const std::exception&) {
            throw ArgumentError("bad view shape '" + entry + "' (expected d or d:k)");
        }
        if (shape.ambient_dim < 1 || shape.intrinsic_dim < 1 || shape.intrinsic_dim > shape.ambient_dim) {
            throw ArgumentError("view shape '" + entry + "' needs 1 <= k <= d");
        }
        shapes.push_back(shape);
    }
    if (shapes.empty()) throw ArgumentError("at least one view shape is required");
    return shapes;
}

MultiViewDataset synth_multiview(const SynthSpec& spec) {
    if (spec.clusters < 1 || spec.per_cluster < 1) throw ArgumentError("clusters and per_cluster must be positive");
    if (spec.views.empty()) throw ArgumentError("at least one view is required");
    if (spec.noise_sigma < 0.0) throw ArgumentError("noise_sigma must be nonnegative");
    if (!(spec.amplitude > 0.0)) throw ArgumentError("amplitude must be positive");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Index n = static_cast<Index>(spec.clusters) * spec.per_cluster;

    MultiViewDataset ds;
    ds.labels = Labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) (*ds.labels)[static_cast<std::size_t>(i)] = static_cast<int>(i / spec.per_cluster);

    for (std::size_t v = 0; v < spec.views.size(); ++v) {
        const auto [d, k] = spec.views[v];
        MatrixXd x(d, n);
        if (spec.kind == SynthKind::linear_subspaces) {
            for (int c = 0; c < spec.clusters; ++c) {
                const MatrixXd basis = orthonormal_basis(d, k, rng);
                for (int m = 0; m < spec.per_cluster; ++m) {
                    Eigen::VectorXd coef(k);
                    for (Index i = 0; i < k; ++i) coef(i) = normal(rng);
                    x.col(static_cast<Index>(c) * spec.per_cluster + m) = basis * coef.normalized();
                }
            }
        } else {
            const MatrixXd basis = orthonormal_basis(d, k, rng);
            for (Index i = 0; i < n; ++i) {
                Eigen::VectorXd dir(k);
                for (Index r = 0; r < k; ++r) dir(r) = normal(rng);
                const double radius = 1.0 + static_cast<double>(i / spec.per_cluster);
                x.col(i) = basis * (radius * dir.normalized());
            }
        }
        if (spec.noise_sigma > 0.0) {
            for (Index j = 0; j < n; ++j) {
                for (Index i = 0; i < d; ++i) x(i, j) += spec.noise_sigma * normal(rng);
            }
        }
        ds.views.push_back(spec.amplitude * x);
        ds.names.push_back("view_" + std::to_string(v + 1));
        ds.kernels.push_back(spec.kind == SynthKind::linear_subspaces ? KernelSpec::linear()
                                                                      : KernelSpec::gaussian());
    }
    return ds;
}

}  // namespace ktmsc
