#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "specdyn/clustering.hpp"
#include "specdyn/config.hpp"
#include "specdyn/embedding.hpp"
#include "specdyn/estimator.hpp"
#include "specdyn/features.hpp"
#include "specdyn/io.hpp"

namespace specdyn {

/// Everything produced by fitting one trajectory.
struct FittedModel {
    OrthoFeatureMap left;
    OrthoFeatureMap right;
    ProjectionEstimate estimate;
    ReshapedKernelModel reshaped;
    Embedder embedder;
};

/// Bases from `states`, projection estimate, rank-r reshaping and embedder.
/// A rank above the number of retained features raises ConfigError.
FittedModel fit_model(const Matrix& states, const FeatureConfig& features, std::size_t rank);

/// Weighted k-means on embedded states with uniform weights. Too many
/// clusters for the distinct embedded points raises ConfigError.
ClusterModel cluster_embedding(const Matrix& psi, std::size_t m, const ClusteringConfig& config);

/// Ground-truth basin of every state of a one-dimensional trajectory.
std::vector<std::size_t> basin_labels(const MultiWell1d& wells, const Matrix& states);

struct SimulateSummary {
    std::size_t length = 0;
    std::size_t dim = 0;
    std::vector<double> basin_occupancy;  // four-well potential only
    std::filesystem::path output;
};

struct FitSummary {
    std::size_t left_size = 0;
    std::size_t right_size = 0;
    Vector sigma;           // singular values of the whitened projection
    Vector reshaped_sigma;  // retained singular values of P_hat
    RankSuggestion suggestion;
    std::optional<double> negative_density_fraction;  // 1-d only
};

struct ClusterRun {
    std::size_t m = 0;
    double objective = 0.0;
    MetastabilityReport metastability;
    std::optional<PartitionComparison> comparison;
};

struct ClusterSummary {
    std::vector<ClusterRun> runs;
};

struct BenchmarkSummary {
    std::vector<BenchmarkRow> rows;
    std::vector<std::size_t> n_values;
    std::vector<double> median_plain;
    std::vector<double> median_reshaped;
    double slope_plain = 0.0;
    double slope_reshaped = 0.0;
    std::optional<double> grid_refinement_error;
    std::optional<double> reference_gap;  // |P*_grid - P*_long_run|_F
    double reference_norm = 0.0;
    std::size_t left_size = 0;
    std::size_t right_size = 0;
};

/// Each command validates the sections it needs, writes its artifacts and a
/// `<command>.resolved_config.json` into `out_dir`, and prints a summary to `log`.
SimulateSummary run_simulate(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
FitSummary run_fit(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
ClusterSummary run_cluster(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
BenchmarkSummary run_benchmark(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace specdyn
