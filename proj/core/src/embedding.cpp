#include "specdyn/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specdyn/error.hpp"

namespace specdyn {

namespace {

Matrix whiten(const Matrix& projection, const FeatureBasis& left, const FeatureBasis& right) {
    if (static_cast<std::size_t>(projection.rows()) != left.size() ||
        static_cast<std::size_t>(projection.cols()) != right.size())
        throw InvalidInput("fit_embedder: projection shape does not match the feature maps");
    const Vector left_scale = left.norms().cwiseSqrt().cwiseInverse();
    const Vector right_scale = right.norms().cwiseSqrt().cwiseInverse();
    return left_scale.asDiagonal() * projection * right_scale.asDiagonal();
}

void check_left(const Embedder& e, const FeatureBasis& left) {
    if (e.left_id != left.id()) throw InvalidInput("embedder: left feature map does not match");
}

}  // namespace

Embedder fit_embedder(const Matrix& projection, const FeatureBasis& left, const FeatureBasis& right,
                      std::size_t rank) {
    const auto full = static_cast<std::size_t>(std::min(projection.rows(), projection.cols()));
    if (rank < 1 || rank > full)
        throw InvalidInput("fit_embedder: rank must lie in [1, " + std::to_string(full) + "]");
    const SvdResult svd = thin_svd(whiten(projection, left, right));
    const auto r = static_cast<Eigen::Index>(rank);

    Embedder out;
    out.sigma = svd.singular_values.head(r);
    out.left_factor = left.norms().cwiseSqrt().cwiseInverse().asDiagonal() * svd.u.leftCols(r) *
                      out.sigma.asDiagonal();
    out.right_factor = right.norms().cwiseSqrt().cwiseInverse().asDiagonal() * svd.v.leftCols(r);
    out.rank = rank;
    out.left_id = left.id();
    out.right_id = right.id();
    return out;
}

Embedder fit_embedder(const ProjectionEstimate& est, const FeatureBasis& left, const FeatureBasis& right,
                      std::size_t rank) {
    if (est.left_id() != left.id() || est.right_id() != right.id())
        throw InvalidInput("fit_embedder: estimate was accumulated with different feature maps");
    return fit_embedder(est.p_hat(), left, right, rank);
}

Vector whitened_spectrum(const Matrix& projection, const FeatureBasis& left, const FeatureBasis& right) {
    return thin_svd(whiten(projection, left, right)).singular_values;
}

Vector embed(const Embedder& e, const FeatureBasis& left, const Vector& x) {
    check_left(e, left);
    return e.left_factor.transpose() * left.evaluate(x);
}

Matrix embed_rows(const Embedder& e, const FeatureBasis& left, const Matrix& states) {
    check_left(e, left);
    Matrix out(states.rows(), static_cast<Eigen::Index>(e.rank));
    for (Eigen::Index t = 0; t < states.rows(); ++t)
        out.row(t) = embed(e, left, states.row(t).transpose()).transpose();
    return out;
}

double diffusion_distance(const Embedder& e, const FeatureBasis& left, const Vector& x, const Vector& z) {
    return (embed(e, left, x) - embed(e, left, z)).norm();
}

double recover_density(const Embedder& e, const FeatureBasis& left, const FeatureBasis& right, const Vector& x,
                       const Vector& y) {
    if (e.right_id != right.id()) throw InvalidInput("embedder: right feature map does not match");
    return embed(e, left, x).dot(e.right_factor.transpose() * right.evaluate(y));
}

double negative_density_fraction(const Embedder& e, const FeatureBasis& left, const FeatureBasis& right,
                                 const Matrix& probes) {
    if (probes.rows() == 0) return 0.0;
    if (e.right_id != right.id()) throw InvalidInput("embedder: right feature map does not match");
    const Matrix psi = embed_rows(e, left, probes);
    Matrix tail(probes.rows(), static_cast<Eigen::Index>(e.rank));
    for (Eigen::Index t = 0; t < probes.rows(); ++t)
        tail.row(t) = (e.right_factor.transpose() * right.evaluate(probes.row(t).transpose())).transpose();
    const Matrix density = psi * tail.transpose();
    const auto negative = (density.array() < 0.0).count();
    return static_cast<double>(negative) / static_cast<double>(density.size());
}

Matrix probe_grid(double lo, double hi, std::size_t count) {
    if (count < 2 || !(hi > lo)) throw InvalidInput("probe_grid: need count >= 2 and hi > lo");
    Matrix out(static_cast<Eigen::Index>(count), 1);
    for (std::size_t k = 0; k < count; ++k)
        out(static_cast<Eigen::Index>(k), 0) = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    return out;
}

}  // namespace specdyn
