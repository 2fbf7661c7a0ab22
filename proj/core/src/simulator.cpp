#include "specdyn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "specdyn/error.hpp"

namespace specdyn {

PotentialFamily parse_potential_family(std::string_view name) {
    if (name == "quadratic") return PotentialFamily::Quadratic;
    if (name == "polynomial") return PotentialFamily::Polynomial;
    if (name == "gaussian_mixture_2d") return PotentialFamily::GaussianMixture2d;
    throw InvalidInput("unknown potential family '" + std::string(name) + "'");
}

std::string_view to_string(PotentialFamily family) {
    switch (family) {
        case PotentialFamily::Quadratic: return "quadratic";
        case PotentialFamily::Polynomial: return "polynomial";
        case PotentialFamily::GaussianMixture2d: return "gaussian_mixture_2d";
    }
    return "unknown";
}

void PotentialSpec::validate() const {
    if (dim == 0) throw InvalidInput("PotentialSpec: dim must be at least 1");
    for (double p : parameters)
        if (!std::isfinite(p)) throw InvalidInput("PotentialSpec: non-finite parameter");
    switch (family) {
        case PotentialFamily::Quadratic:
            if (parameters.size() != 1 && parameters.size() != dim)
                throw InvalidInput("quadratic potential: expected 1 or dim stiffness values");
            break;
        case PotentialFamily::Polynomial:
            if (parameters.empty()) throw InvalidInput("polynomial potential: no coefficients");
            break;
        case PotentialFamily::GaussianMixture2d:
            if (dim != 2) throw InvalidInput("gaussian_mixture_2d potential requires dim = 2");
            if (parameters.size() < 5 || (parameters.size() - 1) % 4 != 0)
                throw InvalidInput("gaussian_mixture_2d potential: expected ridge + 4 values per component");
            for (std::size_t j = 1; j < parameters.size(); j += 4)
                if (!(parameters[j] > 0.0) || !(parameters[j + 3] > 0.0))
                    throw InvalidInput("gaussian_mixture_2d potential: weights and widths must be positive");
            break;
        default:
            throw InvalidInput("unknown potential family");
    }
}

namespace {

// Writes grad V(x) into `grad` and returns V(x). No allocation; used by the
// integrator's inner loop.
double eval_potential(const PotentialSpec& spec, std::span<const double> x, std::span<double> grad) {
    const auto& p = spec.parameters;
    switch (spec.family) {
        case PotentialFamily::Quadratic: {
            double v = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double k = p.size() == 1 ? p[0] : p[i];
                v += 0.5 * k * x[i] * x[i];
                grad[i] = k * x[i];
            }
            return v;
        }
        case PotentialFamily::Polynomial: {
            double v = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                double val = 0.0;
                double der = 0.0;
                for (std::size_t k = p.size(); k-- > 0;) {
                    der = der * x[i] + val;
                    val = val * x[i] + p[k];
                }
                v += val;
                grad[i] = der;
            }
            return v;
        }
        case PotentialFamily::GaussianMixture2d: {
            const double ridge = p[0];
            const std::size_t comps = (p.size() - 1) / 4;
            // Log-sum-exp over components of log w_j - |x - mu_j|^2 / (2 s_j^2).
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < comps; ++j) {
                const double* c = &p[1 + 4 * j];
                const double dx = x[0] - c[1], dy = x[1] - c[2];
                best = std::max(best, std::log(c[0]) - (dx * dx + dy * dy) / (2.0 * c[3] * c[3]));
            }
            double total = 0.0, gx = 0.0, gy = 0.0;
            for (std::size_t j = 0; j < comps; ++j) {
                const double* c = &p[1 + 4 * j];
                const double dx = x[0] - c[1], dy = x[1] - c[2];
                const double s2 = c[3] * c[3];
                const double e = std::exp(std::log(c[0]) - (dx * dx + dy * dy) / (2.0 * s2) - best);
                total += e;
                gx += e * dx / s2;
                gy += e * dy / s2;
            }
            const double r2 = x[0] * x[0] + x[1] * x[1];
            grad[0] = gx / total + 4.0 * ridge * r2 * x[0];
            grad[1] = gy / total + 4.0 * ridge * r2 * x[1];
            return -(best + std::log(total)) + ridge * r2 * r2;
        }
    }
    throw InvalidInput("unknown potential family");
}

}  // namespace

PotentialValue potential_grad(const PotentialSpec& spec, const Vector& x) {
    spec.validate();
    if (static_cast<std::size_t>(x.size()) != spec.dim)
        throw InvalidInput("potential_grad: state dimension mismatch");
    require_finite(x, "potential_grad");
    PotentialValue out{0.0, Vector(x.size())};
    out.value = eval_potential(spec, std::span<const double>(x.data(), x.size()),
                               std::span<double>(out.gradient.data(), out.gradient.size()));
    return out;
}

Trajectory simulate(const PotentialSpec& spec, const SimulationOptions& options) {
    spec.validate();
    if (!(options.inner_dt > 0.0) || !std::isfinite(options.inner_dt))
        throw InvalidInput("simulate: inner_dt must be positive");
    if (options.stride == 0) throw InvalidInput("simulate: stride must be at least 1");
    if (options.n_samples < 2) throw InvalidInput("simulate: n_samples must be at least 2");
    if (static_cast<std::size_t>(options.x0.size()) != spec.dim)
        throw InvalidInput("simulate: x0 dimension mismatch");
    require_finite(options.x0, "simulate x0");

    const std::size_t d = spec.dim;
    const double dt = options.inner_dt;
    const double noise = std::sqrt(2.0 * dt);
    Rng rng(options.seed);
    std::vector<double> x(options.x0.data(), options.x0.data() + d);
    std::vector<double> grad(d);

    std::size_t step = 0;
    const auto advance = [&]() {
        eval_potential(spec, x, grad);
        bool finite = true;
        for (std::size_t i = 0; i < d; ++i) {
            x[i] += -grad[i] * dt + noise * rng.normal();
            finite = finite && std::isfinite(x[i]);
        }
        ++step;
        if (!finite)
            throw NumericalBlowup("simulate: state became non-finite at inner step " + std::to_string(step),
                                  step);
    };

    for (std::size_t k = 0; k < options.burn_in; ++k) advance();

    Trajectory traj;
    traj.states.resize(static_cast<Eigen::Index>(options.n_samples), static_cast<Eigen::Index>(d));
    traj.sample_interval = dt * static_cast<double>(options.stride);
    traj.inner_dt = dt;
    traj.seed = options.seed;
    traj.burn_in_discarded = options.burn_in;
    for (std::size_t s = 0; s < options.n_samples; ++s) {
        for (std::size_t k = 0; k < options.stride; ++k) advance();
        for (std::size_t i = 0; i < d; ++i)
            traj.states(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) = x[i];
    }
    traj.inner_steps = step;
    return traj;
}

std::size_t MultiWell1d::basin_label(double x) const {
    return static_cast<std::size_t>(std::upper_bound(maxima.begin(), maxima.end(), x) - maxima.begin());
}

MultiWell1d four_well_1d(double barrier) {
    if (!(barrier > 0.0)) throw InvalidInput("four_well_1d: barrier must be positive");
    const double outer = 1.7;
    const double inner = outer * (std::sqrt(2.0) - 1.0);
    const double saddle = outer * std::sqrt(2.0 - std::sqrt(2.0));

    // V'(x) = c x (x^2 - inner^2)(x^2 - saddle^2)(x^2 - outer^2); expand in s = x^2.
    const double a = inner * inner, m = saddle * saddle, b = outer * outer;
    const double e1 = a + m + b;
    const double e2 = a * m + a * b + m * b;
    const double e3 = a * m * b;
    const auto unit_v = [&](double x) {
        const double s = x * x;
        return s * s * s * s / 8.0 - e1 * s * s * s / 6.0 + e2 * s * s / 4.0 - e3 * s / 2.0;
    };
    const double c = barrier / (unit_v(0.0) - unit_v(inner));

    MultiWell1d out;
    out.spec.family = PotentialFamily::Polynomial;
    out.spec.dim = 1;
    out.spec.parameters = {0.0, 0.0, -c * e3 / 2.0, 0.0, c * e2 / 4.0, 0.0, -c * e1 / 6.0, 0.0, c / 8.0};
    out.minima = {-outer, -inner, inner, outer};
    out.maxima = {-saddle, 0.0, saddle};
    return out;
}

}  // namespace specdyn
