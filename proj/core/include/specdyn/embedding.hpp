#pragma once

#include <cstddef>
#include <string>

#include "specdyn/estimator.hpp"
#include "specdyn/features.hpp"
#include "specdyn/numerics.hpp"

namespace specdyn {

/// Rank-r spectral state embedding built from the whitened projection matrix
///   R = C^{-1/2} P C_R^{-1/2} = U S V^T,  C = diag(rho), C_R = diag(rho_R).
///
/// psi(x) = left_factor^T Phi(x) with left_factor = C^{-1/2} U_r S_r, and
/// right_factor = C_R^{-1/2} V_r, so that
///   p_hat(y | x) = psi(x)^T right_factor^T PhiR(y).
/// Euclidean distance between embeddings estimates the diffusion distance
/// |p(.|x) - p(.|z)|_{L2}.
struct Embedder {
    Matrix left_factor;   // J x r
    Matrix right_factor;  // J_R x r
    Vector sigma;         // descending singular values of R, length r
    std::size_t rank = 0;
    std::string left_id;
    std::string right_id;
};

Embedder fit_embedder(const Matrix& projection, const FeatureBasis& left, const FeatureBasis& right,
                      std::size_t rank);
Embedder fit_embedder(const ProjectionEstimate& est, const FeatureBasis& left, const FeatureBasis& right,
                      std::size_t rank);

/// Full singular spectrum of the whitened matrix (diagnostics and rank choice).
Vector whitened_spectrum(const Matrix& projection, const FeatureBasis& left, const FeatureBasis& right);

Vector embed(const Embedder& e, const FeatureBasis& left, const Vector& x);

/// Row t is embed(states.row(t)).
Matrix embed_rows(const Embedder& e, const FeatureBasis& left, const Matrix& states);

double diffusion_distance(const Embedder& e, const FeatureBasis& left, const Vector& x, const Vector& z);

/// Recovered transition density p_hat(y | x); no positivity correction.
double recover_density(const Embedder& e, const FeatureBasis& left, const FeatureBasis& right, const Vector& x,
                       const Vector& y);

/// Fraction of (x, y) probe pairs where the recovered density is negative.
double negative_density_fraction(const Embedder& e, const FeatureBasis& left, const FeatureBasis& right,
                                 const Matrix& probes);

/// `count` equally spaced points spanning [lo, hi] (1-d probe grid).
Matrix probe_grid(double lo, double hi, std::size_t count = 101);

}  // namespace specdyn
