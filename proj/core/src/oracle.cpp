#include "specdyn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "specdyn/error.hpp"

namespace specdyn {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kStationaryTol = 1e-10;
constexpr double kPowerTol = 1e-12;
constexpr std::size_t kPowerMaxIter = 1000000;

double stationary_residual(const Matrix& transition, const Vector& pi) {
    return (transition.transpose() * pi - pi).cwiseAbs().maxCoeff();
}

void check_stochastic(const Matrix& transition) {
    if (transition.rows() == 0 || transition.rows() != transition.cols())
        throw InvalidInput("FiniteChain: transition matrix must be square and nonempty");
    require_finite(transition, "FiniteChain transition");
    if ((transition.array() < 0.0).any()) throw InvalidInput("FiniteChain: negative transition probability");
    for (Eigen::Index i = 0; i < transition.rows(); ++i)
        if (std::abs(transition.row(i).sum() - 1.0) > kRowSumTol)
            throw InvalidInput("FiniteChain: row " + std::to_string(i) + " does not sum to 1");
}

}  // namespace

Vector stationary_distribution(const Matrix& transition) {
    check_stochastic(transition);
    const Eigen::Index s = transition.rows();
    Vector pi = Vector::Constant(s, 1.0 / static_cast<double>(s));

    Eigen::EigenSolver<Matrix> solver(transition.transpose());
    if (solver.info() == Eigen::Success) {
        const auto& values = solver.eigenvalues();
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < values.size(); ++k)
            if (std::abs(values(k) - 1.0) < std::abs(values(best) - 1.0)) best = k;
        Vector v = solver.eigenvectors().col(best).real();
        const double total = v.sum();
        if (std::abs(total) > 0.0) {
            v /= total;
            if (v.minCoeff() > -1e-12) pi = v.cwiseMax(0.0) / v.cwiseMax(0.0).sum();
        }
    }
    if (stationary_residual(transition, pi) <= kPowerTol) return pi;

    Vector next(s);
    for (std::size_t iter = 0; iter < kPowerMaxIter; ++iter) {
        next = transition.transpose() * pi;
        next /= next.sum();
        const double change = (next - pi).cwiseAbs().sum();
        pi.swap(next);
        if (change < kPowerTol) break;
    }
    if (stationary_residual(transition, pi) > kStationaryTol)
        throw InvalidInput("stationary_distribution: no unique stationary distribution found");
    return pi;
}

FiniteChain FiniteChain::from_transition(Matrix transition) {
    FiniteChain chain;
    chain.stationary = stationary_distribution(transition);
    chain.transition = std::move(transition);
    return chain;
}

void FiniteChain::validate() const {
    check_stochastic(transition);
    if (stationary.size() != transition.rows()) throw InvalidInput("FiniteChain: stationary length mismatch");
    if ((stationary.array() < 0.0).any() || std::abs(stationary.sum() - 1.0) > kRowSumTol)
        throw InvalidInput("FiniteChain: stationary vector is not a probability vector");
    if (stationary_residual(transition, stationary) > kStationaryTol)
        throw InvalidInput("FiniteChain: stationary vector is not invariant");
}

Matrix chain_projection(const FiniteChain& chain) {
    return chain.stationary.asDiagonal() * chain.transition;
}

Matrix chain_diffusion_distances(const FiniteChain& chain) {
    const Eigen::Index s = chain.transition.rows();
    Matrix out = Matrix::Zero(s, s);
    for (Eigen::Index i = 0; i < s; ++i)
        for (Eigen::Index j = i + 1; j < s; ++j) {
            const double d = (chain.transition.row(i) - chain.transition.row(j)).norm();
            out(i, j) = d;
            out(j, i) = d;
        }
    return out;
}

FiniteChain random_lowrank_chain(std::size_t states, std::size_t rank, std::uint64_t seed) {
    if (states == 0 || rank == 0 || rank > states)
        throw InvalidInput("random_lowrank_chain: need 1 <= rank <= states");
    Rng rng(seed);
    const auto s = static_cast<Eigen::Index>(states);
    const auto r = static_cast<Eigen::Index>(rank);
    auto stochastic = [&rng](Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(0.05, 1.0);
            m.row(i) /= m.row(i).sum();
        }
        return m;
    };
    const Matrix a = stochastic(s, r);
    const Matrix b = stochastic(r, s);
    Matrix t = a * b;
    for (Eigen::Index i = 0; i < s; ++i) t.row(i) /= t.row(i).sum();
    return FiniteChain::from_transition(std::move(t));
}

IndicatorFeatures::IndicatorFeatures(Vector norms, std::string tag) : norms_(std::move(norms)) {
    if (norms_.size() == 0) throw InvalidInput("IndicatorFeatures: need at least one state");
    require_finite(norms_, "IndicatorFeatures norms");
    if ((norms_.array() <= 0.0).any()) throw InvalidInput("IndicatorFeatures: norms must be positive");
    Fingerprint fp;
    fp.add(std::string_view("indicator")).add(std::string_view(tag)).add(norms_);
    id_ = fp.hex();
}

Vector IndicatorFeatures::evaluate(const Vector& x) const {
    check_state(x);
    const double v = x(0);
    if (!(v >= 0.0) || v != std::nearbyint(v) || v >= static_cast<double>(size()))
        throw InvalidInput("IndicatorFeatures: state must be an integer index below " + std::to_string(size()));
    Vector out = Vector::Zero(norms_.size());
    out(static_cast<Eigen::Index>(v)) = 1.0;
    return out;
}

Vector IndicatorFeatures::state(std::size_t index) {
    return Vector::Constant(1, static_cast<double>(index));
}

bool QuadratureGrid::can_coarsen() const {
    switch (rule) {
        case Rule::Trapezoid: return per_axis >= 5 && per_axis % 2 == 1;
        case Rule::Midpoint: return per_axis >= 2 && per_axis % 2 == 0;
        case Rule::Explicit: return false;
    }
    return false;
}

QuadratureGrid QuadratureGrid::coarsen() const {
    if (!can_coarsen()) throw InvalidInput("QuadratureGrid: this grid cannot be coarsened");
    if (rule == Rule::Trapezoid) return trapezoid_grid(box.lower(0), box.upper(0), (per_axis - 1) / 2 + 1);
    return midpoint_grid(box, per_axis / 2);
}

QuadratureGrid trapezoid_grid(double lo, double hi, std::size_t count) {
    if (count < 2 || !(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
        throw InvalidInput("trapezoid_grid: need count >= 2 and finite lo < hi");
    QuadratureGrid g;
    const auto k = static_cast<Eigen::Index>(count);
    const double h = (hi - lo) / static_cast<double>(count - 1);
    g.nodes.resize(k, 1);
    g.weights = Vector::Constant(k, h);
    for (Eigen::Index i = 0; i < k; ++i) g.nodes(i, 0) = lo + h * static_cast<double>(i);
    g.nodes(k - 1, 0) = hi;
    g.weights(0) = h / 2;
    g.weights(k - 1) = h / 2;
    g.box.lower = Vector::Constant(1, lo);
    g.box.upper = Vector::Constant(1, hi);
    g.rule = QuadratureGrid::Rule::Trapezoid;
    g.per_axis = count;
    return g;
}

QuadratureGrid midpoint_grid(const Box& box, std::size_t per_axis) {
    const Eigen::Index d = box.lower.size();
    if (d < 1 || d > 2 || box.upper.size() != d) throw InvalidInput("midpoint_grid: box must be 1- or 2-dimensional");
    if (per_axis < 1) throw InvalidInput("midpoint_grid: need at least one cell per axis");
    if (((box.upper - box.lower).array() <= 0.0).any()) throw InvalidInput("midpoint_grid: empty box");
    const auto n = static_cast<Eigen::Index>(per_axis);
    const Vector h = (box.upper - box.lower) / static_cast<double>(per_axis);
    const Eigen::Index total = d == 1 ? n : n * n;
    QuadratureGrid g;
    g.nodes.resize(total, d);
    g.weights = Vector::Constant(total, h.prod());
    for (Eigen::Index idx = 0; idx < total; ++idx) {
        const Eigen::Index i = idx % n;
        g.nodes(idx, 0) = box.lower(0) + h(0) * (static_cast<double>(i) + 0.5);
        if (d == 2) g.nodes(idx, 1) = box.lower(1) + h(1) * (static_cast<double>(idx / n) + 0.5);
    }
    g.box = box;
    g.rule = QuadratureGrid::Rule::Midpoint;
    g.per_axis = per_axis;
    return g;
}

QuadratureGrid explicit_grid(Matrix nodes, Vector weights) {
    if (nodes.rows() == 0 || weights.size() != nodes.rows())
        throw InvalidInput("explicit_grid: nodes and weights must be nonempty and of equal length");
    require_finite(nodes, "explicit_grid nodes");
    require_finite(weights, "explicit_grid weights");
    if ((weights.array() <= 0.0).any()) throw InvalidInput("explicit_grid: weights must be positive");
    QuadratureGrid g;
    g.box.lower = nodes.colwise().minCoeff().transpose();
    g.box.upper = nodes.colwise().maxCoeff().transpose();
    g.nodes = std::move(nodes);
    g.weights = std::move(weights);
    g.rule = QuadratureGrid::Rule::Explicit;
    return g;
}

namespace {

Matrix quadrature_sum(const TransitionModel& model, const QuadratureGrid& grid, const FeatureBasis& left,
                      const FeatureBasis& right) {
    const Eigen::Index k = grid.nodes.rows();
    Matrix mass(k, k);
    for (Eigen::Index u = 0; u < k; ++u) {
        const Vector xu = grid.nodes.row(u).transpose();
        const double pu = model.stationary(xu);
        for (Eigen::Index v = 0; v < k; ++v) {
            const double value = model.kernel(xu, grid.nodes.row(v).transpose());
            if (!std::isfinite(value) || !std::isfinite(pu))
                throw InvalidInput("quadrature_projection: non-finite kernel value");
            mass(u, v) = grid.weights(u) * grid.weights(v) * pu * value;
        }
    }
    return left.evaluate_rows(grid.nodes).transpose() * mass * right.evaluate_rows(grid.nodes);
}

}  // namespace

QuadratureProjection quadrature_projection(const TransitionModel& model, const QuadratureGrid& grid,
                                           const FeatureBasis& left, const FeatureBasis& right) {
    if (!model.stationary || !model.kernel) throw InvalidInput("quadrature_projection: incomplete model");
    QuadratureProjection out;
    out.projection = quadrature_sum(model, grid, left, right);
    out.refinement_error = grid.can_coarsen()
                               ? (out.projection - quadrature_sum(model, grid.coarsen(), left, right)).norm()
                               : std::numeric_limits<double>::quiet_NaN();
    return out;
}

TransitionModel ornstein_uhlenbeck(double tau) {
    if (!(tau > 0.0)) throw InvalidInput("ornstein_uhlenbeck: tau must be positive");
    const double decay = std::exp(-tau);
    const double var = 1.0 - std::exp(-2.0 * tau);
    TransitionModel m;
    m.stationary = [](const Vector& x) {
        return std::exp(-0.5 * x.squaredNorm()) / std::sqrt(2.0 * std::numbers::pi);
    };
    m.kernel = [decay, var](const Vector& x, const Vector& y) {
        const double d = y(0) - decay * x(0);
        return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
    };
    return m;
}

namespace {

Matrix matrix_power(Matrix base, std::size_t exponent) {
    Matrix result = Matrix::Identity(base.rows(), base.cols());
    bool first = true;
    while (exponent > 0) {
        if (exponent & 1U) {
            result = first ? base : Matrix(result * base);
            first = false;
        }
        exponent >>= 1U;
        if (exponent > 0) base = base * base;
    }
    return result;
}

}  // namespace

EulerGridChain euler_grid_chain(const PotentialSpec& spec, double inner_dt, std::size_t stride, double lo,
                                double hi, std::size_t count) {
    spec.validate();
    if (spec.dim != 1) throw InvalidInput("euler_grid_chain: potential must be one-dimensional");
    if (!(inner_dt > 0.0) || stride == 0) throw InvalidInput("euler_grid_chain: need inner_dt > 0 and stride >= 1");
    EulerGridChain out;
    out.grid = trapezoid_grid(lo, hi, count);
    const Eigen::Index k = out.grid.nodes.rows();
    Matrix step(k, k);
    const double inv_var = 1.0 / (4.0 * inner_dt);
    for (Eigen::Index u = 0; u < k; ++u) {
        const Vector x = out.grid.nodes.row(u).transpose();
        const double mean = x(0) - potential_grad(spec, x).gradient(0) * inner_dt;
        for (Eigen::Index v = 0; v < k; ++v) {
            const double d = out.grid.nodes(v, 0) - mean;
            step(u, v) = out.grid.weights(v) * std::exp(-d * d * inv_var);
        }
        const double total = step.row(u).sum();
        if (!(total > 0.0) || !std::isfinite(total))
            throw NumericalBlowup("euler_grid_chain: Euler step leaves the grid from node " + std::to_string(u),
                                  static_cast<std::size_t>(u));
        step.row(u) /= total;
    }
    out.step_matrix = matrix_power(std::move(step), stride);
    for (Eigen::Index u = 0; u < k; ++u) out.step_matrix.row(u) /= out.step_matrix.row(u).sum();
    out.stationary = stationary_distribution(out.step_matrix);
    return out;
}

Matrix grid_chain_projection(const EulerGridChain& chain, const FeatureBasis& left, const FeatureBasis& right) {
    return left.evaluate_rows(chain.grid.nodes).transpose() * chain.stationary.asDiagonal() * chain.step_matrix *
           right.evaluate_rows(chain.grid.nodes);
}

ReferenceProjection euler_grid_reference(const PotentialSpec& spec, double inner_dt, std::size_t stride,
                                         double lo, double hi, std::size_t count, const FeatureBasis& left,
                                         const FeatureBasis& right) {
    if (count < 5 || count % 2 == 0) throw InvalidInput("euler_grid_reference: grid count must be odd and >= 5");
    ReferenceProjection out;
    out.projection = grid_chain_projection(euler_grid_chain(spec, inner_dt, stride, lo, hi, count), left, right);
    const Matrix coarse =
        grid_chain_projection(euler_grid_chain(spec, inner_dt, stride, lo, hi, (count - 1) / 2 + 1), left, right);
    out.refinement_error = (out.projection - coarse).norm();
    return out;
}

}  // namespace specdyn
