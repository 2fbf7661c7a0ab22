#include "specdyn/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "specdyn/error.hpp"

namespace specdyn {

void GaussianKernelSpec::validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
        throw InvalidInput("GaussianKernelSpec: bandwidth must be positive");
    if (dim == 0) throw InvalidInput("GaussianKernelSpec: dim must be at least 1");
}

double gaussian_kernel(const GaussianKernelSpec& spec, const Vector& x, const Vector& y) {
    if (x.size() != y.size() || static_cast<std::size_t>(x.size()) != spec.dim)
        throw InvalidInput("gaussian_kernel: dimension mismatch");
    return std::exp(-(x - y).squaredNorm() / (2.0 * spec.bandwidth * spec.bandwidth));
}

void FeatureBasis::check_state(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != state_dim())
        throw InvalidInput("feature evaluation: state has dimension " + std::to_string(x.size()) +
                           ", expected " + std::to_string(state_dim()));
}

Matrix FeatureBasis::evaluate_rows(const Matrix& states) const {
    Matrix out(states.rows(), static_cast<Eigen::Index>(size()));
    for (Eigen::Index t = 0; t < states.rows(); ++t)
        out.row(t) = evaluate(states.row(t).transpose()).transpose();
    return out;
}

RawFeatureMap::RawFeatureMap(GaussianKernelSpec spec, Matrix frequencies, Vector phases,
                             std::uint64_t seed)
    : spec_(spec),
      frequencies_(std::move(frequencies)),
      phases_(std::move(phases)),
      scale_(0.0),
      seed_(seed) {
    spec_.validate();
    if (phases_.size() == 0) throw InvalidInput("RawFeatureMap: need at least one feature");
    if (frequencies_.rows() != phases_.size() ||
        static_cast<std::size_t>(frequencies_.cols()) != spec_.dim)
        throw InvalidInput("RawFeatureMap: frequency matrix must be N x d");
    require_finite(frequencies_, "RawFeatureMap frequencies");
    require_finite(phases_, "RawFeatureMap phases");
    scale_ = std::sqrt(2.0 / static_cast<double>(phases_.size()));
}

Vector RawFeatureMap::evaluate(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != spec_.dim)
        throw InvalidInput("RawFeatureMap::evaluate: dimension mismatch");
    Vector arg = frequencies_ * x + phases_;
    return scale_ * arg.array().cos().matrix();
}

RawFeatureMap sample_rff(const GaussianKernelSpec& spec, std::size_t n_features, std::uint64_t seed) {
    spec.validate();
    if (n_features == 0) throw InvalidInput("sample_rff: n_features must be at least 1");
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(n_features);
    const auto d = static_cast<Eigen::Index>(spec.dim);
    Matrix freq(n, d);
    Vector phase(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < d; ++k) freq(i, k) = rng.normal() / spec.bandwidth;
        phase(i) = 2.0 * std::numbers::pi * rng.uniform();
    }
    return RawFeatureMap(spec, std::move(freq), std::move(phase), seed);
}

double Box::volume() const {
    double v = 1.0;
    for (Eigen::Index k = 0; k < lower.size(); ++k) v *= upper(k) - lower(k);
    return v;
}

Box padded_bounding_box(const Matrix& states, double pad_fraction) {
    if (states.rows() == 0) throw InvalidInput("padded_bounding_box: no states");
    require_finite(states, "padded_bounding_box");
    Box box{states.colwise().minCoeff().transpose(), states.colwise().maxCoeff().transpose()};
    for (Eigen::Index k = 0; k < box.lower.size(); ++k) {
        double extent = box.upper(k) - box.lower(k);
        // A degenerate coordinate still needs a box of positive volume.
        if (extent <= 0.0) extent = 1.0;
        box.lower(k) -= pad_fraction * extent;
        box.upper(k) += pad_fraction * extent;
    }
    return box;
}

Matrix uniform_box_samples(const Box& box, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    Matrix out(static_cast<Eigen::Index>(count), box.lower.size());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index k = 0; k < out.cols(); ++k) out(i, k) = rng.uniform(box.lower(k), box.upper(k));
    return out;
}

Matrix subsample_rows(const Matrix& states, std::size_t max_count) {
    const auto total = static_cast<std::size_t>(states.rows());
    if (max_count == 0 || total <= max_count) return states;
    Matrix out(static_cast<Eigen::Index>(max_count), states.cols());
    for (std::size_t k = 0; k < max_count; ++k) {
        const std::size_t src = k * total / max_count;
        out.row(static_cast<Eigen::Index>(k)) = states.row(static_cast<Eigen::Index>(src));
    }
    return out;
}

double OrthoMeasure::mass() const {
    return kind == Kind::UniformBox ? box.volume() : 1.0;
}

namespace {

std::string ortho_map_id(const OrthoFeatureMap& map) {
    Fingerprint fp;
    fp.add(std::string_view("ortho_feature_map"))
        .add(map.raw().spec().bandwidth)
        .add(static_cast<std::uint64_t>(map.raw().spec().dim))
        .add(map.raw().seed())
        .add(map.raw().frequencies())
        .add(map.raw().phases())
        .add(map.transform())
        .add(map.norms())
        .add(static_cast<std::uint64_t>(map.measure().kind))
        .add(static_cast<std::uint64_t>(map.measure().sample_count))
        .add(map.measure().seed);
    if (map.measure().kind == OrthoMeasure::Kind::UniformBox)
        fp.add(map.measure().box.lower).add(map.measure().box.upper);
    return fp.hex();
}

}  // namespace

OrthoFeatureMap::OrthoFeatureMap(RawFeatureMap raw, Matrix transform, Vector rho, OrthoMeasure measure)
    : raw_(std::move(raw)), transform_(std::move(transform)), rho_(std::move(rho)), measure_(std::move(measure)) {
    if (rho_.size() == 0) throw InvalidInput("OrthoFeatureMap: empty basis");
    if (transform_.rows() != rho_.size() || static_cast<std::size_t>(transform_.cols()) != raw_.size())
        throw InvalidInput("OrthoFeatureMap: transform must be J x N");
    require_finite(transform_, "OrthoFeatureMap transform");
    for (Eigen::Index i = 0; i < rho_.size(); ++i) {
        if (!(rho_(i) > 0.0) || !std::isfinite(rho_(i)))
            throw InvalidInput("OrthoFeatureMap: norms must be positive");
        if (i > 0 && rho_(i) > rho_(i - 1)) throw InvalidInput("OrthoFeatureMap: norms must be nonincreasing");
    }
    if (measure_.kind == OrthoMeasure::Kind::UniformBox &&
        (static_cast<std::size_t>(measure_.box.lower.size()) != raw_.dim() ||
         static_cast<std::size_t>(measure_.box.upper.size()) != raw_.dim()))
        throw InvalidInput("OrthoFeatureMap: box dimension mismatch");
    id_ = ortho_map_id(*this);
}

Vector OrthoFeatureMap::evaluate(const Vector& x) const {
    check_state(x);
    return transform_ * raw_.evaluate(x);
}

OrthoFeatureMap orthogonalize(const RawFeatureMap& raw, const Matrix& samples, double drop_tol,
                              OrthoMeasure measure) {
    if (!(drop_tol >= 0.0)) throw InvalidInput("orthogonalize: drop_tol must be nonnegative");
    if (samples.rows() == 0) throw InvalidInput("orthogonalize: no quadrature samples");
    if (static_cast<std::size_t>(samples.cols()) != raw.dim())
        throw InvalidInput("orthogonalize: sample dimension mismatch");
    require_finite(samples, "orthogonalize samples");

    const auto n = static_cast<Eigen::Index>(raw.size());
    constexpr Eigen::Index chunk = 4096;
    Matrix gram = Matrix::Zero(n, n);
    Matrix block;
    for (Eigen::Index start = 0; start < samples.rows(); start += chunk) {
        const Eigen::Index len = std::min(chunk, samples.rows() - start);
        block.resize(len, n);
        for (Eigen::Index t = 0; t < len; ++t)
            block.row(t) = raw.evaluate(samples.row(start + t).transpose()).transpose();
        gram.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    }
    gram = gram.selfadjointView<Eigen::Lower>();
    measure.sample_count = static_cast<std::size_t>(samples.rows());
    gram *= measure.mass() / static_cast<double>(samples.rows());

    const SymEig eig = sym_eig(gram);
    const double top = eig.eigenvalues(0);
    if (!(top > 0.0)) throw DegenerateFeatures("orthogonalize: Gram matrix has no positive eigenvalue");
    Eigen::Index kept = 0;
    while (kept < n && eig.eigenvalues(kept) > drop_tol * top && eig.eigenvalues(kept) > 0.0) ++kept;
    if (kept == 0) throw DegenerateFeatures("orthogonalize: every eigenvalue is below the drop threshold");

    Matrix transform = eig.eigenvectors.leftCols(kept).transpose();
    Vector rho = eig.eigenvalues.head(kept);
    return OrthoFeatureMap(raw, std::move(transform), std::move(rho), std::move(measure));
}

namespace {

std::size_t default_sample_count(const RawFeatureMap& raw, const Matrix& states, const BasisOptions& o) {
    if (o.quadrature_samples != 0) return o.quadrature_samples;
    return std::min<std::size_t>(static_cast<std::size_t>(states.rows()), 20 * raw.size());
}

}  // namespace

OrthoFeatureMap build_left_basis(const RawFeatureMap& raw, const Matrix& states, const BasisOptions& options) {
    const Matrix samples = subsample_rows(states, default_sample_count(raw, states, options));
    OrthoMeasure measure;
    measure.kind = OrthoMeasure::Kind::Empirical;
    return orthogonalize(raw, samples, options.drop_tol, measure);
}

OrthoFeatureMap build_right_basis(const RawFeatureMap& raw, const Matrix& states, const BasisOptions& options) {
    OrthoMeasure measure;
    measure.kind = OrthoMeasure::Kind::UniformBox;
    measure.seed = options.quadrature_seed;
    measure.box = padded_bounding_box(states, options.box_padding);
    const Matrix samples =
        uniform_box_samples(measure.box, default_sample_count(raw, states, options), options.quadrature_seed);
    return orthogonalize(raw, samples, options.drop_tol, measure);
}

}  // namespace specdyn
