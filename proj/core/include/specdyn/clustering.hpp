#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "specdyn/numerics.hpp"

namespace specdyn {

struct WeightedPointSet {
    Matrix points;   // n x r
    Vector weights;  // length n, nonnegative, positive total

    /// Unit weight on every row.
    static WeightedPointSet uniform(Matrix points);
    void validate() const;
};

struct ClusterModel {
    Matrix centroids;  // m x r
    double objective = 0.0;
    std::size_t iterations_run = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> labels;     // converged assignment of the training points
    std::vector<double> objective_trace;  // objective after each Lloyd iteration of the winning restart

    std::size_t size() const { return static_cast<std::size_t>(centroids.rows()); }
};

struct KMeansOptions {
    std::size_t max_iter = 300;
    std::size_t n_restarts = 10;
};

/// Weighted Lloyd iterations from k-means++ seeds; best of `n_restarts` by
/// objective. Restart k is seeded from `seed` and k only.
ClusterModel weighted_kmeans(const WeightedPointSet& pts, std::size_t m, std::uint64_t seed,
                             const KMeansOptions& options = {});

/// Nearest centroid, ties to the lowest index.
std::size_t assign(const ClusterModel& model, const Vector& psi);
std::vector<std::size_t> assign_rows(const ClusterModel& model, const Matrix& points);

/// Weighted sum of squared distances to the assigned centroids.
double kmeans_objective(const Matrix& points, const Vector& weights, const Matrix& centroids,
                        std::span<const std::size_t> labels);

struct PartitionComparison {
    double rate = 0.0;                      // M, in [0, m]
    std::vector<std::size_t> permutation;  // reference class j -> predicted label permutation[j]
};

/// Misclassification rate
///   M = min_sigma sum_j w(ref = j, pred != sigma(j)) / w(ref = j)
/// over permutations sigma of the m reference classes. Reference labels must
/// cover 0..m-1 with positive weight; predicted labels must be < m.
PartitionComparison misclassification(std::span<const std::size_t> predicted,
                                       std::span<const std::size_t> reference, std::span<const double> weights);

struct MetastabilityReport {
    double score = 0.0;  // sum over visited clusters of the empirical self-transition rate
    bool all_visited = true;
    std::vector<double> self_transition;  // per cluster; NaN where no pair starts there
};

/// Sum_k #(t: l_t = k, l_{t+1} = k) / #(t: l_t = k) over clusters 0..m-1.
MetastabilityReport metastability_score(std::span<const std::size_t> labels, std::size_t m);

}  // namespace specdyn
