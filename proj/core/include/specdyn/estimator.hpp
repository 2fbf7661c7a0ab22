#pragma once

#include <cstddef>
#include <string>

#include "specdyn/features.hpp"
#include "specdyn/numerics.hpp"
#include "specdyn/simulator.hpp"

namespace specdyn {

/// Pairs per chunk in accumulation. Per-pair outer products are summed in
/// index order inside a chunk and chunk partials are summed in chunk order,
/// so the result does not depend on how chunks are scheduled.
inline constexpr std::size_t kAccumulateChunk = 4096;

/// Empirical projection matrix  P_hat = (1/n) sum_t Phi(X_t) PhiR(X_{t+1})^T.
class ProjectionEstimate {
public:
    /// From an unnormalized pair sum.
    ProjectionEstimate(Matrix pair_sum, std::size_t pair_count, std::string left_id, std::string right_id);

    /// From an already averaged matrix (deserialization, exact references).
    static ProjectionEstimate from_average(Matrix p_hat, std::size_t pair_count, std::string left_id,
                                           std::string right_id);

    const Matrix& p_hat() const { return p_hat_; }
    const Matrix& pair_sum() const { return pair_sum_; }
    std::size_t pair_count() const { return pair_count_; }
    const std::string& left_id() const { return left_id_; }
    const std::string& right_id() const { return right_id_; }

    /// Pair-count weighted combination; the pair sums are added.
    static ProjectionEstimate merge(const ProjectionEstimate& a, const ProjectionEstimate& b);

private:
    ProjectionEstimate() = default;

    Matrix pair_sum_;
    Matrix p_hat_;
    std::size_t pair_count_ = 0;
    std::string left_id_;
    std::string right_id_;
};

/// n = T - 1 consecutive pairs of the rows of `states`.
ProjectionEstimate accumulate(const Matrix& states, const FeatureBasis& left, const FeatureBasis& right,
                              std::size_t chunk = kAccumulateChunk);
ProjectionEstimate accumulate(const Trajectory& traj, const FeatureBasis& left, const FeatureBasis& right);

/// Explicit transition pairs (from.row(t), to.row(t)).
ProjectionEstimate accumulate_pairs(const Matrix& from, const Matrix& to, const FeatureBasis& left,
                                    const FeatureBasis& right, std::size_t chunk = kAccumulateChunk);

/// Best rank-r approximation of P_hat: P_tilde = u diag(sigma) v^T.
struct ReshapedKernelModel {
    Matrix u;
    Vector sigma;
    Matrix v;
    std::size_t rank = 0;
    double residual_sigma = 0.0;  // sigma_{r+1}(P_hat), 0 at full rank
    std::string left_id;
    std::string right_id;
    std::size_t pair_count = 0;

    Matrix matrix() const { return u * sigma.asDiagonal() * v.transpose(); }
};

ReshapedKernelModel reshape(const ProjectionEstimate& est, std::size_t rank);

/// mu_hat(x, y) = Phi(x)^T P_tilde PhiR(y).
double kme_evaluate(const ReshapedKernelModel& model, const FeatureBasis& left, const FeatureBasis& right,
                    const Vector& x, const Vector& y);

/// Plain (un-reshaped) embedding Phi(x)^T P_hat PhiR(y).
double kme_evaluate(const ProjectionEstimate& est, const FeatureBasis& left, const FeatureBasis& right,
                    const Vector& x, const Vector& y);

/// Frobenius distance to a reference projection matrix.
double embedding_error(const Matrix& estimate, const Matrix& reference);
double embedding_error(const ReshapedKernelModel& model, const Matrix& reference);
double embedding_error(const ProjectionEstimate& est, const Matrix& reference);

struct RankSuggestion {
    std::size_t rank = 0;  // k maximizing sigma_k / sigma_{k+1}
    double gap = 0.0;
};

/// Largest spectral gap among descending singular values. Advisory only.
RankSuggestion suggest_rank(const Vector& singular_values);

}  // namespace specdyn
