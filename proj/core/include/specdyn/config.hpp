#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "specdyn/features.hpp"
#include "specdyn/io.hpp"
#include "specdyn/simulator.hpp"

namespace specdyn {

struct PotentialConfig {
    /// "four_well", "quadratic", "polynomial" or "gaussian_mixture_2d".
    std::string family = "four_well";
    std::vector<double> parameters;
    std::size_t dim = 1;
    double barrier = 5.0;  // four_well only

    PotentialSpec spec() const;
    /// Ground-truth wells, available for the four-well family only.
    std::optional<MultiWell1d> wells() const;
};

struct SimulationConfig {
    PotentialConfig potential;
    std::vector<double> x0;  // empty: origin
    double inner_dt = 1e-3;
    std::size_t stride = 1;
    std::size_t n_samples = 2;
    std::size_t burn_in = 100000;
    std::uint64_t seed = 0;
    TrajectoryFormat format = TrajectoryFormat::Binary;

    SimulationOptions options() const;
    double sample_interval() const { return inner_dt * static_cast<double>(stride); }
};

struct FeatureConfig {
    double bandwidth = 1.0;
    std::size_t n_features = 2000;
    std::uint64_t seed = 0;
    double drop_tol = 1e-8;
    std::size_t quadrature_samples = 0;
    std::uint64_t quadrature_seed = 0;
    double box_padding = 0.1;

    BasisOptions basis_options() const;
};

struct EstimationConfig {
    std::size_t rank = 1;
};

struct ClusteringConfig {
    std::vector<std::size_t> m{4};
    std::size_t restarts = 10;
    std::size_t max_iter = 300;
    std::uint64_t seed = 0;
};

struct BenchmarkConfig {
    enum class Reference { Grid, LongRun, Both };

    std::vector<std::size_t> n_values;
    std::vector<std::uint64_t> seeds;
    Reference reference = Reference::Grid;
    std::size_t grid_count = 401;
    double grid_lo = -2.2;
    double grid_hi = 2.2;
    double grid_dt = 0.0;  // 0: the simulation's inner_dt
    std::size_t n_ref = 10000000;
    std::uint64_t reference_seed = 0;
    std::size_t basis_samples = 100000;
    std::uint64_t basis_seed = 0;
};

struct PathsConfig {
    std::string trajectory = "trajectory.bin";
};

/// A parsed and validated run configuration. Sections absent from the
/// document stay empty; each command requires the sections it uses.
struct RunConfig {
    std::optional<SimulationConfig> simulation;
    std::optional<FeatureConfig> features;
    std::optional<EstimationConfig> estimation;
    std::optional<ClusteringConfig> clustering;
    std::optional<BenchmarkConfig> benchmark;
    PathsConfig paths;

    const SimulationConfig& require_simulation() const;
    const FeatureConfig& require_features() const;
    const EstimationConfig& require_estimation() const;
    const ClusteringConfig& require_clustering() const;
    const BenchmarkConfig& require_benchmark() const;
};

/// Parses a JSON document. Unknown keys, wrong types, missing seeds and
/// out-of-range values raise ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// JSON text of the configuration with every default filled in.
std::string resolved_config_json(const RunConfig& config);

}  // namespace specdyn
