#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "specdyn/numerics.hpp"

namespace specdyn {

enum class PotentialFamily {
    /// V(x) = 1/2 sum_i k_i x_i^2; parameters are one stiffness or one per coordinate.
    Quadratic,
    /// V(x) = sum_i sum_k c_k x_i^k; parameters are c_0, c_1, ... (applied per coordinate).
    Polynomial,
    /// V(x) = -log sum_j w_j exp(-|x - mu_j|^2 / (2 s_j^2)) + ridge |x|^4 in two dimensions;
    /// parameters are ridge followed by (w, mu_x, mu_y, s) per component.
    GaussianMixture2d,
};

PotentialFamily parse_potential_family(std::string_view name);
std::string_view to_string(PotentialFamily family);

struct PotentialSpec {
    PotentialFamily family = PotentialFamily::Quadratic;
    std::vector<double> parameters;
    std::size_t dim = 1;

    void validate() const;
};

struct PotentialValue {
    double value = 0.0;
    Vector gradient;
};

PotentialValue potential_grad(const PotentialSpec& spec, const Vector& x);

/// States sampled every `sample_interval` time units.
struct Trajectory {
    Matrix states;  // T x d
    double sample_interval = 0.0;
    double inner_dt = 0.0;
    std::uint64_t seed = 0;
    std::size_t burn_in_discarded = 0;
    std::size_t inner_steps = 0;  // total Euler steps taken, burn-in included

    std::size_t length() const { return static_cast<std::size_t>(states.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(states.cols()); }
};

struct SimulationOptions {
    Vector x0;
    double inner_dt = 1e-3;
    std::size_t n_samples = 2;
    std::size_t stride = 1;
    std::size_t burn_in = 100000;
    std::uint64_t seed = 0;
};

/// Euler-Maruyama for dX = -grad V(X) dt + sqrt(2) dB: after `burn_in` inner
/// steps, records the state after every `stride` further steps until
/// `n_samples` states are stored. Consumes burn_in + stride * n_samples steps.
Trajectory simulate(const PotentialSpec& spec, const SimulationOptions& options);

/// One-dimensional multi-well potential with its stationary points, used as
/// ground truth for metastable clustering.
struct MultiWell1d {
    PotentialSpec spec;
    std::vector<double> minima;  // ascending
    std::vector<double> maxima;  // interior maxima, ascending; basin boundaries

    /// Index of the basin of attraction containing x (number of maxima below x).
    std::size_t basin_label(double x) const;
    std::size_t basin_count() const { return minima.size(); }
};

/// Symmetric octic with minima at +-1.7(sqrt 2 - 1) and +-1.7, maxima at 0 and
/// +-1.7 sqrt(2 - sqrt 2). All four wells are equally deep and every barrier is
/// `barrier` high (default 5).
MultiWell1d four_well_1d(double barrier = 5.0);

}  // namespace specdyn
