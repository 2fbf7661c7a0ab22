#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "specdyn/numerics.hpp"

namespace specdyn {

/// Shift-invariant Gaussian kernel K(x, y) = exp(-|x - y|^2 / (2 bandwidth^2)).
struct GaussianKernelSpec {
    double bandwidth = 1.0;
    std::size_t dim = 1;

    void validate() const;
};

double gaussian_kernel(const GaussianKernelSpec& spec, const Vector& x, const Vector& y);

/// A finite set of real feature functions on R^d. Implemented by the
/// orthogonalized random Fourier basis and by the indicator basis used for
/// finite-state oracles.
class FeatureBasis {
public:
    virtual ~FeatureBasis() = default;

    /// Number of features J.
    virtual std::size_t size() const = 0;
    virtual std::size_t state_dim() const = 0;
    virtual Vector evaluate(const Vector& x) const = 0;
    /// Squared norms rho of the features under the basis' reference measure.
    virtual const Vector& norms() const = 0;
    /// Content digest; two bases with equal ids evaluate identically.
    virtual const std::string& id() const = 0;

    /// Row t of the result is evaluate(states.row(t)).
    Matrix evaluate_rows(const Matrix& states) const;

protected:
    void check_state(const Vector& x) const;
};

/// Random Fourier features h_i(x) = sqrt(2/N) cos(w_i . x + b_i).
class RawFeatureMap {
public:
    RawFeatureMap(GaussianKernelSpec spec, Matrix frequencies, Vector phases, std::uint64_t seed);

    std::size_t size() const { return static_cast<std::size_t>(phases_.size()); }
    std::size_t dim() const { return spec_.dim; }
    const GaussianKernelSpec& spec() const { return spec_; }
    const Matrix& frequencies() const { return frequencies_; }
    const Vector& phases() const { return phases_; }
    double scale() const { return scale_; }
    std::uint64_t seed() const { return seed_; }

    Vector evaluate(const Vector& x) const;

private:
    GaussianKernelSpec spec_;
    Matrix frequencies_;  // N x d
    Vector phases_;
    double scale_;
    std::uint64_t seed_;
};

/// Frequencies ~ Normal(0, bandwidth^-2 I), phases ~ Uniform[0, 2 pi).
RawFeatureMap sample_rff(const GaussianKernelSpec& spec, std::size_t n_features, std::uint64_t seed);

/// Axis-aligned box.
struct Box {
    Vector lower;
    Vector upper;

    double volume() const;
};

/// Bounding box of the rows of `states`, widened by `pad_fraction` of the
/// extent on every side.
Box padded_bounding_box(const Matrix& states, double pad_fraction = 0.1);

Matrix uniform_box_samples(const Box& box, std::size_t count, std::uint64_t seed);

/// At most `max_count` rows taken at evenly spaced indices (all rows if fewer).
Matrix subsample_rows(const Matrix& states, std::size_t max_count);

/// Measure under which a basis was orthogonalized.
struct OrthoMeasure {
    enum class Kind { Empirical, UniformBox };

    Kind kind = Kind::Empirical;
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;  // quadrature seed, box measure only
    Box box;                 // box measure only

    /// Total mass: 1 for the empirical probability measure, the box volume
    /// for Lebesgue measure restricted to the box.
    double mass() const;
};

/// Orthogonal basis Phi(x) = transform * h(x) with squared norms rho under
/// `measure`: the Monte-Carlo Gram of Phi is diag(rho).
class OrthoFeatureMap final : public FeatureBasis {
public:
    OrthoFeatureMap(RawFeatureMap raw, Matrix transform, Vector rho, OrthoMeasure measure);

    std::size_t size() const override { return static_cast<std::size_t>(rho_.size()); }
    std::size_t state_dim() const override { return raw_.dim(); }
    Vector evaluate(const Vector& x) const override;
    const Vector& norms() const override { return rho_; }
    const std::string& id() const override { return id_; }

    const RawFeatureMap& raw() const { return raw_; }
    const Matrix& transform() const { return transform_; }
    const OrthoMeasure& measure() const { return measure_; }

private:
    RawFeatureMap raw_;
    Matrix transform_;  // J x N
    Vector rho_;
    OrthoMeasure measure_;
    std::string id_;
};

/// Eigen-decomposes the Gram  mass(measure) * mean_k h(x_k) h(x_k)^T  over the
/// rows of `samples` and keeps eigenpairs with eigenvalue > drop_tol * lambda_1.
OrthoFeatureMap orthogonalize(const RawFeatureMap& raw, const Matrix& samples, double drop_tol,
                              OrthoMeasure measure);

struct BasisOptions {
    double drop_tol = 1e-8;
    /// 0 selects min(trajectory length, 20 N).
    std::size_t quadrature_samples = 0;
    std::uint64_t quadrature_seed = 0;
    double box_padding = 0.1;
};

/// Left basis: orthogonal in L2 of the empirical trajectory measure.
OrthoFeatureMap build_left_basis(const RawFeatureMap& raw, const Matrix& states,
                                 const BasisOptions& options = {});

/// Right basis: orthogonal in L2 (Lebesgue) on the padded bounding box of the
/// trajectory, by uniform Monte-Carlo quadrature.
OrthoFeatureMap build_right_basis(const RawFeatureMap& raw, const Matrix& states,
                                  const BasisOptions& options = {});

}  // namespace specdyn
