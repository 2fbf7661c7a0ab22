#include "specdyn/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specdyn/error.hpp"

namespace specdyn {

ProjectionEstimate::ProjectionEstimate(Matrix pair_sum, std::size_t pair_count, std::string left_id,
                                       std::string right_id)
    : pair_sum_(std::move(pair_sum)),
      pair_count_(pair_count),
      left_id_(std::move(left_id)),
      right_id_(std::move(right_id)) {
    if (pair_count_ == 0) throw InvalidInput("ProjectionEstimate: pair_count must be at least 1");
    require_finite(pair_sum_, "ProjectionEstimate");
    p_hat_ = pair_sum_ / static_cast<double>(pair_count_);
}

ProjectionEstimate ProjectionEstimate::from_average(Matrix p_hat, std::size_t pair_count, std::string left_id,
                                                    std::string right_id) {
    if (pair_count == 0) throw InvalidInput("ProjectionEstimate: pair_count must be at least 1");
    require_finite(p_hat, "ProjectionEstimate");
    ProjectionEstimate out;
    out.pair_sum_ = p_hat * static_cast<double>(pair_count);
    out.p_hat_ = std::move(p_hat);
    out.pair_count_ = pair_count;
    out.left_id_ = std::move(left_id);
    out.right_id_ = std::move(right_id);
    return out;
}

ProjectionEstimate ProjectionEstimate::merge(const ProjectionEstimate& a, const ProjectionEstimate& b) {
    if (a.left_id_ != b.left_id_ || a.right_id_ != b.right_id_)
        throw InvalidInput("ProjectionEstimate::merge: estimates use different feature maps");
    if (a.pair_sum_.rows() != b.pair_sum_.rows() || a.pair_sum_.cols() != b.pair_sum_.cols())
        throw InvalidInput("ProjectionEstimate::merge: shape mismatch");
    return ProjectionEstimate(a.pair_sum_ + b.pair_sum_, a.pair_count_ + b.pair_count_, a.left_id_, a.right_id_);
}

namespace {

// Sum of outer products left(from_row(t)) right(to_row(t))^T over t < n,
// chunked as described at kAccumulateChunk.
template <typename FromRow, typename ToRow>
Matrix chunked_pair_sum(std::size_t n, FromRow from_row, ToRow to_row, const FeatureBasis& left,
                        const FeatureBasis& right, std::size_t chunk) {
    const auto jl = static_cast<Eigen::Index>(left.size());
    const auto jr = static_cast<Eigen::Index>(right.size());
    Matrix total = Matrix::Zero(jl, jr);
    Matrix partial(jl, jr);
    for (std::size_t start = 0; start < n; start += chunk) {
        const std::size_t stop = std::min(n, start + chunk);
        partial.setZero();
        for (std::size_t t = start; t < stop; ++t) {
            const Vector phi = left.evaluate(from_row(t));
            const Vector psi = right.evaluate(to_row(t));
            for (Eigen::Index j = 0; j < jr; ++j) {
                const double pj = psi(j);
                for (Eigen::Index i = 0; i < jl; ++i) partial(i, j) += phi(i) * pj;
            }
        }
        for (Eigen::Index j = 0; j < jr; ++j)
            for (Eigen::Index i = 0; i < jl; ++i) total(i, j) += partial(i, j);
    }
    return total;
}

void check_feature_dims(const Matrix& states, const FeatureBasis& left, const FeatureBasis& right) {
    if (static_cast<std::size_t>(states.cols()) != left.state_dim() ||
        static_cast<std::size_t>(states.cols()) != right.state_dim())
        throw InvalidInput("accumulate: feature maps do not match the state dimension");
}

}  // namespace

ProjectionEstimate accumulate(const Matrix& states, const FeatureBasis& left, const FeatureBasis& right,
                              std::size_t chunk) {
    if (states.rows() < 2) throw InvalidInput("accumulate: trajectory needs at least 2 states");
    if (chunk == 0) throw InvalidInput("accumulate: chunk size must be positive");
    check_feature_dims(states, left, right);
    require_finite(states, "accumulate");
    const auto n = static_cast<std::size_t>(states.rows() - 1);
    const auto row = [&](std::size_t t) -> Vector { return states.row(static_cast<Eigen::Index>(t)).transpose(); };
    Matrix sum = chunked_pair_sum(
        n, row, [&](std::size_t t) { return row(t + 1); }, left, right, chunk);
    return ProjectionEstimate(std::move(sum), n, left.id(), right.id());
}

ProjectionEstimate accumulate(const Trajectory& traj, const FeatureBasis& left, const FeatureBasis& right) {
    return accumulate(traj.states, left, right);
}

ProjectionEstimate accumulate_pairs(const Matrix& from, const Matrix& to, const FeatureBasis& left,
                                    const FeatureBasis& right, std::size_t chunk) {
    if (from.rows() != to.rows() || from.cols() != to.cols())
        throw InvalidInput("accumulate_pairs: pair arrays differ in shape");
    if (from.rows() < 1) throw InvalidInput("accumulate_pairs: need at least one pair");
    if (chunk == 0) throw InvalidInput("accumulate_pairs: chunk size must be positive");
    check_feature_dims(from, left, right);
    require_finite(from, "accumulate_pairs");
    require_finite(to, "accumulate_pairs");
    const auto n = static_cast<std::size_t>(from.rows());
    Matrix sum = chunked_pair_sum(
        n, [&](std::size_t t) -> Vector { return from.row(static_cast<Eigen::Index>(t)).transpose(); },
        [&](std::size_t t) -> Vector { return to.row(static_cast<Eigen::Index>(t)).transpose(); }, left, right,
        chunk);
    return ProjectionEstimate(std::move(sum), n, left.id(), right.id());
}

ReshapedKernelModel reshape(const ProjectionEstimate& est, std::size_t rank) {
    const Matrix& p = est.p_hat();
    const auto full = static_cast<std::size_t>(std::min(p.rows(), p.cols()));
    if (rank < 1 || rank > full)
        throw InvalidInput("reshape: rank must lie in [1, " + std::to_string(full) + "]");
    const SvdResult svd = thin_svd(p);
    const auto r = static_cast<Eigen::Index>(rank);
    ReshapedKernelModel out;
    out.u = svd.u.leftCols(r);
    out.sigma = svd.singular_values.head(r);
    out.v = svd.v.leftCols(r);
    out.rank = rank;
    out.residual_sigma = rank < full ? svd.singular_values(r) : 0.0;
    out.left_id = est.left_id();
    out.right_id = est.right_id();
    out.pair_count = est.pair_count();
    return out;
}

namespace {

void check_ids(const std::string& left_id, const std::string& right_id, const FeatureBasis& left,
               const FeatureBasis& right) {
    if (left_id != left.id() || right_id != right.id())
        throw InvalidInput("kme_evaluate: feature maps do not match the model");
}

}  // namespace

double kme_evaluate(const ReshapedKernelModel& model, const FeatureBasis& left, const FeatureBasis& right,
                    const Vector& x, const Vector& y) {
    check_ids(model.left_id, model.right_id, left, right);
    const Vector a = model.u.transpose() * left.evaluate(x);
    const Vector b = model.v.transpose() * right.evaluate(y);
    return a.dot(model.sigma.cwiseProduct(b));
}

double kme_evaluate(const ProjectionEstimate& est, const FeatureBasis& left, const FeatureBasis& right,
                    const Vector& x, const Vector& y) {
    check_ids(est.left_id(), est.right_id(), left, right);
    return left.evaluate(x).dot(est.p_hat() * right.evaluate(y));
}

double embedding_error(const Matrix& estimate, const Matrix& reference) {
    if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols())
        throw InvalidInput("embedding_error: shape mismatch");
    return (estimate - reference).norm();
}

double embedding_error(const ReshapedKernelModel& model, const Matrix& reference) {
    return embedding_error(model.matrix(), reference);
}

double embedding_error(const ProjectionEstimate& est, const Matrix& reference) {
    return embedding_error(est.p_hat(), reference);
}

RankSuggestion suggest_rank(const Vector& singular_values) {
    RankSuggestion best;
    for (Eigen::Index k = 0; k + 1 < singular_values.size(); ++k) {
        const double hi = singular_values(k), lo = singular_values(k + 1);
        if (!(hi > 0.0)) break;
        const double gap = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        if (gap > best.gap) {
            best.gap = gap;
            best.rank = static_cast<std::size_t>(k + 1);
        }
        if (!(lo > 0.0)) break;
    }
    return best;
}

}  // namespace specdyn
