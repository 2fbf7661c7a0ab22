#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "specdyn/error.hpp"
#include "specdyn/simulator.hpp"

using specdyn::Matrix;
using specdyn::PotentialFamily;
using specdyn::PotentialSpec;
using specdyn::Vector;

namespace {

PotentialSpec quadratic(double k, std::size_t dim = 1) {
    PotentialSpec s;
    s.family = PotentialFamily::Quadratic;
    s.parameters = {k};
    s.dim = dim;
    return s;
}

PotentialSpec mixture() {
    PotentialSpec s;
    s.family = PotentialFamily::GaussianMixture2d;
    s.dim = 2;
    s.parameters = {0.1, 1.0, -1.0, 0.0, 0.5, 1.0, 1.0, 0.0, 0.5, 0.5, 0.0, 1.5, 0.6};
    return s;
}

PotentialSpec polynomial() {
    PotentialSpec s;
    s.family = PotentialFamily::Polynomial;
    s.dim = 2;
    s.parameters = {0.3, -1.0, 0.5, 0.2, 0.25};
    return s;
}

double value(const PotentialSpec& s, double x) { return specdyn::potential_grad(s, Vector::Constant(1, x)).value; }
double slope(const PotentialSpec& s, double x) {
    return specdyn::potential_grad(s, Vector::Constant(1, x)).gradient(0);
}

specdyn::SimulationOptions options(std::size_t dim, std::size_t n, std::size_t stride, std::size_t burn_in,
                                   std::uint64_t seed) {
    specdyn::SimulationOptions o;
    o.x0 = Vector::Zero(static_cast<Eigen::Index>(dim));
    o.inner_dt = 1e-3;
    o.n_samples = n;
    o.stride = stride;
    o.burn_in = burn_in;
    o.seed = seed;
    return o;
}

double sample_variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(PotentialGrad, QuadraticAtTwo) {
    const auto r = specdyn::potential_grad(quadratic(1.0), Vector::Constant(1, 2.0));
    EXPECT_DOUBLE_EQ(r.value, 2.0);
    EXPECT_DOUBLE_EQ(r.gradient(0), 2.0);
}

TEST(PotentialGrad, PerCoordinateStiffness) {
    PotentialSpec s = quadratic(1.0, 2);
    s.parameters = {2.0, 4.0};
    Vector x(2);
    x << 1.0, -0.5;
    const auto r = specdyn::potential_grad(s, x);
    EXPECT_DOUBLE_EQ(r.value, 1.5);
    EXPECT_DOUBLE_EQ(r.gradient(0), 2.0);
    EXPECT_DOUBLE_EQ(r.gradient(1), -2.0);
}

TEST(PotentialGrad, StationaryAtConstructedMinima) {
    const auto wells = specdyn::four_well_1d();
    for (double m : wells.minima) EXPECT_LE(std::abs(slope(wells.spec, m)), 1e-12) << m;
    for (double m : wells.maxima) EXPECT_LE(std::abs(slope(wells.spec, m)), 1e-12) << m;
    EXPECT_EQ(specdyn::potential_grad(quadratic(3.0, 2), Vector::Zero(2)).gradient, Vector::Zero(2));
}

TEST(PotentialGrad, MatchesCentralDifferences) {
    testgen::Gen gen(1);
    const double h = 1e-5;
    const std::vector<PotentialSpec> specs = {quadratic(0.7, 3), polynomial(), mixture(),
                                              specdyn::four_well_1d().spec};
    for (const auto& spec : specs) {
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const Vector x = gen.vector(static_cast<Eigen::Index>(spec.dim), -2.0, 2.0);
            const Vector g = specdyn::potential_grad(spec, x).gradient;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                Vector up = x, down = x;
                up(i) += h;
                down(i) -= h;
                const double fd = (specdyn::potential_grad(spec, up).value -
                                   specdyn::potential_grad(spec, down).value) / (2.0 * h);
                worst = std::max(worst, std::abs(g(i) - fd) / std::max(1.0, std::abs(g(i))));
            }
        }
        EXPECT_LE(worst, 1e-5) << to_string(spec.family);
    }
}

TEST(PotentialGrad, Errors) {
    EXPECT_THROW(specdyn::potential_grad(quadratic(1.0), Vector::Zero(2)), specdyn::InvalidInput);
    EXPECT_THROW(specdyn::potential_grad(quadratic(1.0), Vector::Constant(1, NAN)), specdyn::InvalidInput);
    PotentialSpec bad = mixture();
    bad.dim = 1;
    EXPECT_THROW(specdyn::potential_grad(bad, Vector::Zero(1)), specdyn::InvalidInput);
    EXPECT_THROW(specdyn::parse_potential_family("double_well"), specdyn::InvalidInput);
    EXPECT_EQ(specdyn::parse_potential_family("gaussian_mixture_2d"), PotentialFamily::GaussianMixture2d);
}

TEST(Simulate, BrownianVarianceAtUnitTime) {
    std::vector<double> finals;
    finals.reserve(10000);
    for (std::uint64_t r = 0; r < 10000; ++r) {
        const auto traj = specdyn::simulate(quadratic(0.0), options(1, 2, 1000, 0, 1000 + r));
        finals.push_back(traj.states(0, 0));
    }
    EXPECT_NEAR(sample_variance(finals), 2.0, 0.1);
}

TEST(Simulate, OrnsteinUhlenbeckStationaryVariance) {
    const auto traj = specdyn::simulate(quadratic(1.0), options(1, 20000, 1000, 10000, 3));
    const std::vector<double> xs(traj.states.data(), traj.states.data() + traj.states.size());
    EXPECT_NEAR(sample_variance(xs), 1.0, 0.05);
}

TEST(Simulate, DeterministicForFixedSeed) {
    const auto a = specdyn::simulate(mixture(), options(2, 500, 10, 100, 9));
    const auto b = specdyn::simulate(mixture(), options(2, 500, 10, 100, 9));
    EXPECT_EQ(a.states, b.states);
    const auto c = specdyn::simulate(mixture(), options(2, 500, 10, 100, 10));
    EXPECT_NE(a.states, c.states);
}

TEST(Simulate, ZeroGradientGivesScaledGaussianIncrements) {
    const auto traj = specdyn::simulate(quadratic(0.0, 2), options(2, 50, 3, 7, 21));
    specdyn::Rng rng(21);
    const double scale = std::sqrt(2.0 * 1e-3);
    std::vector<double> x(2, 0.0);
    for (int k = 0; k < 7; ++k)
        for (double& xi : x) xi += scale * rng.normal();
    for (Eigen::Index s = 0; s < 50; ++s) {
        for (int k = 0; k < 3; ++k)
            for (double& xi : x) xi += scale * rng.normal();
        EXPECT_EQ(traj.states(s, 0), x[0]);
        EXPECT_EQ(traj.states(s, 1), x[1]);
    }
}

TEST(Simulate, StepAccounting) {
    const auto traj = specdyn::simulate(quadratic(1.0), options(1, 37, 11, 123, 2));
    EXPECT_EQ(traj.length(), 37U);
    EXPECT_EQ(traj.dim(), 1U);
    EXPECT_EQ(traj.inner_steps, 123U + 11U * 37U);
    EXPECT_EQ(traj.burn_in_discarded, 123U);
    EXPECT_DOUBLE_EQ(traj.sample_interval, 11e-3);
}

TEST(Simulate, StiffPotentialBlowsUp) {
    auto o = options(1, 100, 10, 0, 1);
    o.x0 = Vector::Constant(1, 1.0);
    o.inner_dt = 0.5;
    try {
        specdyn::simulate(quadratic(1e6), o);
        FAIL() << "expected NumericalBlowup";
    } catch (const specdyn::NumericalBlowup& e) {
        EXPECT_GT(e.step(), 0U);
        EXPECT_LE(e.step(), 1000U);
    }
}

TEST(Simulate, RejectsBadOptions) {
    auto o = options(1, 10, 1, 0, 1);
    o.inner_dt = 0.0;
    EXPECT_THROW(specdyn::simulate(quadratic(1.0), o), specdyn::InvalidInput);
    o = options(1, 10, 0, 0, 1);
    EXPECT_THROW(specdyn::simulate(quadratic(1.0), o), specdyn::InvalidInput);
    o = options(1, 1, 1, 0, 1);
    EXPECT_THROW(specdyn::simulate(quadratic(1.0), o), specdyn::InvalidInput);
    o = options(2, 10, 1, 0, 1);
    EXPECT_THROW(specdyn::simulate(quadratic(1.0), o), specdyn::InvalidInput);
}

TEST(FourWell, GridRootsGiveFourMinimaAndThreeMaxima) {
    const auto wells = specdyn::four_well_1d();
    const int count = 10000;
    std::vector<double> minima, maxima;
    double prev_x = -2.0, prev_g = slope(wells.spec, prev_x);
    for (int i = 1; i < count; ++i) {
        const double x = -2.0 + 4.0 * i / (count - 1);
        const double g = slope(wells.spec, x);
        if (prev_g < 0.0 && g >= 0.0) minima.push_back(0.5 * (prev_x + x));
        if (prev_g > 0.0 && g <= 0.0) maxima.push_back(0.5 * (prev_x + x));
        prev_x = x;
        prev_g = g;
    }
    ASSERT_EQ(minima.size(), 4U);
    ASSERT_EQ(maxima.size(), 3U);
    const double spacing = 4.0 / (count - 1);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(minima[k], wells.minima[k], spacing);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(maxima[k], wells.maxima[k], spacing);
}

TEST(FourWell, BarriersAreAtLeastTwo) {
    const auto wells = specdyn::four_well_1d();
    for (std::size_t k = 0; k < 3; ++k) {
        const double top = value(wells.spec, wells.maxima[k]);
        EXPECT_GE(top - value(wells.spec, wells.minima[k]), 2.0);
        EXPECT_GE(top - value(wells.spec, wells.minima[k + 1]), 2.0);
        EXPECT_NEAR(top - value(wells.spec, wells.minima[k]), 5.0, 1e-9);
    }
}

TEST(FourWell, PotentialIsEven) {
    const auto wells = specdyn::four_well_1d();
    testgen::Gen gen(4);
    for (int i = 0; i < 200; ++i) {
        const double x = gen.uniform(-2.5, 2.5);
        EXPECT_NEAR(value(wells.spec, x), value(wells.spec, -x), 1e-12);
    }
}

TEST(FourWell, MinimaHaveDistinctLabels) {
    const auto wells = specdyn::four_well_1d();
    ASSERT_EQ(wells.basin_count(), 4U);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(wells.basin_label(wells.minima[k]), k);
    EXPECT_EQ(wells.basin_label(-5.0), 0U);
    EXPECT_EQ(wells.basin_label(5.0), 3U);
}

TEST(FourWell, TrajectoryVisitsEveryBasin) {
    const auto wells = specdyn::four_well_1d();
    auto o = options(1, 1000000, 1, 0, 11);
    const auto traj = specdyn::simulate(wells.spec, o);
    std::vector<double> mass(4, 0.0);
    for (Eigen::Index t = 0; t < traj.states.rows(); ++t) mass[wells.basin_label(traj.states(t, 0))] += 1.0;
    for (std::size_t k = 0; k < 4; ++k) EXPECT_GE(mass[k] / 1e6, 0.02) << "basin " << k;
}
