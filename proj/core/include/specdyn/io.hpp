#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specdyn/clustering.hpp"
#include "specdyn/embedding.hpp"
#include "specdyn/estimator.hpp"
#include "specdyn/features.hpp"
#include "specdyn/numerics.hpp"
#include "specdyn/oracle.hpp"
#include "specdyn/simulator.hpp"

namespace specdyn {

/// General notation with 17 significant digits (trailing zeros dropped);
/// parses back to the same double.
std::string format_double(double value);

enum class TrajectoryFormat { Csv, Binary };

TrajectoryFormat parse_trajectory_format(std::string_view name);

/// CSV with header `t,x1,...,xd`; t is the sample index times the sample interval.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// 32-byte little-endian header: "SPDYTRAJ", u32 version (1), u64 T, u32 d,
/// f64 sample interval; then T*d f64 values in row order.
void write_trajectory_binary(const std::filesystem::path& path, const Trajectory& traj);

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj, TrajectoryFormat format);

/// Reads either format, chosen by the leading magic bytes. Only the states
/// and the sample interval are stored on disk.
Trajectory read_trajectory(const std::filesystem::path& path);

void save_feature_map(const std::filesystem::path& path, const OrthoFeatureMap& map);
/// Raw frequencies and phases are regenerated from the stored seed.
OrthoFeatureMap load_feature_map(const std::filesystem::path& path);

void save_projection(const std::filesystem::path& path, const ProjectionEstimate& est);
ProjectionEstimate load_projection(const std::filesystem::path& path);

void save_reshaped(const std::filesystem::path& path, const ReshapedKernelModel& model);
ReshapedKernelModel load_reshaped(const std::filesystem::path& path);

void save_embedder(const std::filesystem::path& path, const Embedder& e);
Embedder load_embedder(const std::filesystem::path& path);

void save_chain(const std::filesystem::path& path, const FiniteChain& chain);
FiniteChain load_chain(const std::filesystem::path& path);

struct ClusterReport {
    ClusterModel model;
    MetastabilityReport metastability;
    std::optional<PartitionComparison> comparison;
};

void save_cluster_report(const std::filesystem::path& path, const ClusterReport& report);

/// `x1,...,xd,psi1,...,psir`.
void write_embedding_csv(const std::filesystem::path& path, const Matrix& states, const Matrix& psi);

/// `x1,...,xd,label`.
void write_labels_csv(const std::filesystem::path& path, const Matrix& states,
                      std::span<const std::size_t> labels);

struct BenchmarkRow {
    std::size_t n = 0;
    double error_plain = 0.0;
    double error_reshaped = 0.0;
    std::uint64_t seed = 0;
};

/// `n,error_plain,error_reshaped,seed`.
void write_benchmark_csv(const std::filesystem::path& path, std::span<const BenchmarkRow> rows);
std::vector<BenchmarkRow> read_benchmark_csv(const std::filesystem::path& path);

/// Whole-file helpers.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace specdyn
