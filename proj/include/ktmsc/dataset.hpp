#pragma once

#include "ktmsc/kernel.hpp"
#include "ktmsc/metrics.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ktmsc {

/// Several feature views of the same N samples. View v is d_v x N (one
/// column per sample).
struct MultiViewDataset {
    std::vector<MatrixXd> views;
    std::optional<Labels> labels;
    std::vector<std::string> names;
    // Per-view kernel suggestions carried by the manifest; may be empty.
    std::vector<KernelSpec> kernels;

    Index samples() const { return views.empty() ? 0 : views.front().cols(); }
    Index view_count() const { return static_cast<Index>(views.size()); }

    // Throws DatasetError if views disagree on N or labels have the wrong length.
    void validate() const;
};

// CSV helpers. Rows are records; a leading non-numeric row is a header.
MatrixXd read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(const std::filesystem::path& path, const MatrixXd& m,
                      const std::vector<std::string>& header = {});
std::vector<Labels> read_label_columns(const std::filesystem::path& path);
Labels read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const Labels& labels);

// Shortest round-trip decimal form of x.
std::string format_double(double x);

/// Reads view_1.csv ... view_V.csv (row = sample), optional labels.csv and an
/// optional dataset.json manifest from `dir`.
MultiViewDataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const MultiViewDataset& dataset, const std::filesystem::path& dir);

enum class SynthKind { linear_subspaces, nonlinear_rings };

std::string to_string(SynthKind kind);
SynthKind synth_kind_from_string(const std::string& name);

/// Ambient dimension of a view and the dimension of the structure each
/// cluster lives on: the subspace dimension for linear_subspaces, the
/// dimension of the plane/space holding the rings for nonlinear_rings.
struct ViewShape {
    Index ambient_dim = 0;
    Index intrinsic_dim = 0;
};

// Parses "30:4,40:5"; an entry without ":k" uses `default_intrinsic`.
std::vector<ViewShape> parse_view_shapes(const std::string& spec, Index default_intrinsic);

struct SynthSpec {
    SynthKind kind = SynthKind::linear_subspaces;
    int clusters = 3;
    int per_cluster = 20;
    std::vector<ViewShape> views;
    double noise_sigma = 0.0;
    // Overall magnitude of the features; noise_sigma is relative to it.
    double amplitude = 1.0;
    std::uint64_t seed = 0;
};

/// Synthetic multi-view data with planted clusters.
/// linear_subspaces: each cluster spans a random intrinsic_dim-dimensional
/// subspace per view (unit-scale samples). nonlinear_rings: cluster c lies on
/// the sphere of radius c + 1 inside a random intrinsic_dim-dimensional
/// subspace shared by all clusters, so no union of linear subspaces separates
/// them. Gaussian noise of scale noise_sigma is added in the ambient space,
/// then every view is multiplied by `amplitude`.
MultiViewDataset synth_multiview(const SynthSpec& spec);

}  // namespace ktmsc
