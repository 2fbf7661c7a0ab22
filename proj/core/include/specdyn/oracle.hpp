#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "specdyn/features.hpp"
#include "specdyn/numerics.hpp"
#include "specdyn/simulator.hpp"

namespace specdyn {

/// Explicit finite-state Markov chain with its stationary distribution.
struct FiniteChain {
    Matrix transition;  // S x S, row stochastic
    Vector stationary;  // pi, pi^T T = pi^T

    std::size_t size() const { return static_cast<std::size_t>(transition.rows()); }

    /// Validates T and solves for pi.
    static FiniteChain from_transition(Matrix transition);
    /// Rows sum to 1 within 1e-12, entries >= 0, pi T = pi within 1e-10.
    void validate() const;
};

/// Stationary distribution by dense eigen-solve, polished (or replaced when the
/// eigen-solve is inaccurate) by power iteration to 1e-12.
Vector stationary_distribution(const Matrix& transition);

/// P*_{ij} = pi_i T_{ij}.
Matrix chain_projection(const FiniteChain& chain);

/// Entry (i, j) is |T_{i,:} - T_{j,:}|_2.
Matrix chain_diffusion_distances(const FiniteChain& chain);

/// T = A B with A (S x r) and B (r x S) row stochastic with strictly positive entries.
FiniteChain random_lowrank_chain(std::size_t states, std::size_t rank, std::uint64_t seed);

/// Indicator basis on states {0, ..., S-1}, each encoded as a 1-d vector
/// holding the integer index. Feature i is 1 at state i and 0 elsewhere.
class IndicatorFeatures final : public FeatureBasis {
public:
    /// `norms` are the squared norms under the chosen measure: pi for the
    /// left basis, 1 (counting measure) for the right basis.
    IndicatorFeatures(Vector norms, std::string tag);

    std::size_t size() const override { return static_cast<std::size_t>(norms_.size()); }
    std::size_t state_dim() const override { return 1; }
    Vector evaluate(const Vector& x) const override;
    const Vector& norms() const override { return norms_; }
    const std::string& id() const override { return id_; }

    static Vector state(std::size_t index);

private:
    Vector norms_;
    std::string id_;
};

/// Nodes and positive weights of a quadrature rule.
struct QuadratureGrid {
    enum class Rule { Trapezoid, Midpoint, Explicit };

    Matrix nodes;  // K x d
    Vector weights;
    Box box;
    Rule rule = Rule::Explicit;
    std::size_t per_axis = 0;

    std::size_t size() const { return static_cast<std::size_t>(nodes.rows()); }
    /// Same rule at roughly half the resolution; only for Trapezoid with an
    /// odd node count and Midpoint with an even count per axis.
    bool can_coarsen() const;
    QuadratureGrid coarsen() const;
};

/// 1-d composite trapezoid rule with `count` nodes on [lo, hi].
QuadratureGrid trapezoid_grid(double lo, double hi, std::size_t count);

/// Midpoint rule with `per_axis` cells per axis on a box of dimension 1 or 2.
QuadratureGrid midpoint_grid(const Box& box, std::size_t per_axis);

/// Arbitrary nodes and positive weights (e.g. counting measure on states).
QuadratureGrid explicit_grid(Matrix nodes, Vector weights);

/// A transition density p(y | x) with its stationary density pi(x).
struct TransitionModel {
    std::function<double(const Vector&)> stationary;
    std::function<double(const Vector&, const Vector&)> kernel;
};

struct QuadratureProjection {
    Matrix projection;
    /// Frobenius change against the half-resolution grid; NaN when the grid
    /// cannot be coarsened.
    double refinement_error = 0.0;
};

/// P* = sum_{u,v} w_u w_v pi(u) p(v | u) Phi(u) PhiR(v)^T.
QuadratureProjection quadrature_projection(const TransitionModel& model, const QuadratureGrid& grid,
                                           const FeatureBasis& left, const FeatureBasis& right);

/// Closed-form Ornstein-Uhlenbeck process dX = -X dt + sqrt 2 dB observed
/// every `tau`: p(y | x) = N(y; x e^{-tau}, 1 - e^{-2 tau}), pi = N(0, 1).
TransitionModel ornstein_uhlenbeck(double tau);

/// The Euler scheme of a 1-d potential, discretized on a trapezoid grid: one
/// step moves node u to node v with probability proportional to
/// w_v N(v; u - V'(u) dt, 2 dt). The chain is raised to `stride` steps.
struct EulerGridChain {
    QuadratureGrid grid;
    Matrix step_matrix;  // row-stochastic transition over `stride` steps
    Vector stationary;   // probability mass per node
};

EulerGridChain euler_grid_chain(const PotentialSpec& spec, double inner_dt, std::size_t stride, double lo,
                                double hi, std::size_t count);

/// P* = sum_{u,v} pi_u K_{uv} Phi(u) PhiR(v)^T of a grid chain.
Matrix grid_chain_projection(const EulerGridChain& chain, const FeatureBasis& left, const FeatureBasis& right);

struct ReferenceProjection {
    Matrix projection;
    double refinement_error = 0.0;  // Frobenius change against the half-resolution grid
};

/// Grid-chain reference with its refinement estimate (count must be odd).
ReferenceProjection euler_grid_reference(const PotentialSpec& spec, double inner_dt, std::size_t stride,
                                         double lo, double hi, std::size_t count, const FeatureBasis& left,
                                         const FeatureBasis& right);

}  // namespace specdyn
