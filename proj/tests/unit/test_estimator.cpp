#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "test_bases.hpp"
#include "specdyn/error.hpp"
#include "specdyn/estimator.hpp"
#include "specdyn/oracle.hpp"

using specdyn::Matrix;
using specdyn::Vector;

namespace {

Matrix column(std::initializer_list<double> values) {
    Matrix m(static_cast<Eigen::Index>(values.size()), 1);
    Eigen::Index i = 0;
    for (double v : values) m(i++, 0) = v;
    return m;
}

specdyn::ProjectionEstimate diagonal_estimate(std::initializer_list<double> d) {
    Vector v(static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (double x : d) v(i++) = x;
    return specdyn::ProjectionEstimate::from_average(v.asDiagonal(), 1, "l", "r");
}

specdyn::OrthoFeatureMap rff_basis(std::size_t dim, std::uint64_t seed) {
    specdyn::GaussianKernelSpec k;
    k.bandwidth = 0.8;
    k.dim = dim;
    const auto raw = specdyn::sample_rff(k, 12, seed);
    testgen::Gen gen(seed);
    return specdyn::build_left_basis(raw, gen.matrix(400, static_cast<Eigen::Index>(dim)));
}

// Chunked pair sum written out independently of the library.
Matrix reference_pair_sum(const Matrix& from, const Matrix& to, const specdyn::FeatureBasis& left,
                          const specdyn::FeatureBasis& right, Eigen::Index chunk) {
    Matrix total = Matrix::Zero(static_cast<Eigen::Index>(left.size()), static_cast<Eigen::Index>(right.size()));
    for (Eigen::Index start = 0; start < from.rows(); start += chunk) {
        Matrix partial = Matrix::Zero(total.rows(), total.cols());
        for (Eigen::Index t = start; t < std::min(from.rows(), start + chunk); ++t) {
            const Vector a = left.evaluate(from.row(t).transpose());
            const Vector b = right.evaluate(to.row(t).transpose());
            for (Eigen::Index j = 0; j < total.cols(); ++j)
                for (Eigen::Index i = 0; i < total.rows(); ++i) partial(i, j) += a(i) * b(j);
        }
        for (Eigen::Index j = 0; j < total.cols(); ++j)
            for (Eigen::Index i = 0; i < total.rows(); ++i) total(i, j) += partial(i, j);
    }
    return total;
}

}  // namespace

TEST(Accumulate, ScalarIdentityTwoPairs) {
    const testgen::ScalarIdentityBasis phi;
    const auto est = specdyn::accumulate(column({1, 2, 3}), phi, phi);
    EXPECT_EQ(est.pair_count(), 2U);
    EXPECT_DOUBLE_EQ(est.p_hat()(0, 0), 4.0);
    EXPECT_DOUBLE_EQ(est.pair_sum()(0, 0), 8.0);
}

TEST(Accumulate, ConstantFeatureGivesOne) {
    const testgen::ConstantBasis one(2);
    testgen::Gen gen(1);
    const auto est = specdyn::accumulate(gen.matrix(57, 2), one, one);
    EXPECT_EQ(est.pair_count(), 56U);
    EXPECT_DOUBLE_EQ(est.p_hat()(0, 0), 1.0);
}

TEST(Accumulate, SequentialSumMatchesBitForBit) {
    const auto left = rff_basis(2, 3);
    const auto right = rff_basis(2, 4);
    testgen::Gen gen(5);
    const Matrix states = gen.matrix(100, 2);
    const auto est = specdyn::accumulate(states, left, right);
    Matrix sequential = Matrix::Zero(est.pair_sum().rows(), est.pair_sum().cols());
    for (Eigen::Index t = 0; t + 1 < states.rows(); ++t) {
        const Vector a = left.evaluate(states.row(t).transpose());
        const Vector b = right.evaluate(states.row(t + 1).transpose());
        for (Eigen::Index j = 0; j < b.size(); ++j)
            for (Eigen::Index i = 0; i < a.size(); ++i) sequential(i, j) += a(i) * b(j);
    }
    EXPECT_EQ(est.pair_sum(), sequential);
    EXPECT_EQ(est.pair_count(), 99U);
}

TEST(Accumulate, ChunkedReductionMatchesIndependentScheme) {
    const auto left = rff_basis(1, 6);
    const auto right = rff_basis(1, 7);
    testgen::Gen gen(8);
    const Matrix states = gen.matrix(250, 1);
    for (std::size_t chunk : {1UL, 7UL, 64UL, 4096UL}) {
        const auto est = specdyn::accumulate(states, left, right, chunk);
        const Matrix expected = reference_pair_sum(states.topRows(249), states.bottomRows(249), left, right,
                                                   static_cast<Eigen::Index>(chunk));
        EXPECT_EQ(est.pair_sum(), expected) << chunk;
    }
}

TEST(Accumulate, PairsFromTrajectoryEqualConsecutiveAccumulation) {
    const auto left = rff_basis(1, 9);
    testgen::Gen gen(10);
    const Matrix states = gen.matrix(30, 1);
    const auto a = specdyn::accumulate(states, left, left);
    const auto b = specdyn::accumulate_pairs(states.topRows(29), states.bottomRows(29), left, left);
    EXPECT_EQ(a.pair_sum(), b.pair_sum());
}

TEST(Accumulate, MergeEqualsConcatenatedPairs) {
    const auto left = rff_basis(1, 11);
    const auto right = rff_basis(1, 12);
    testgen::Gen gen(13);
    const Matrix a = gen.matrix(11, 1);
    const Matrix b = gen.matrix(7, 1);
    const auto ea = specdyn::accumulate(a, left, right, 10);
    const auto eb = specdyn::accumulate(b, left, right, 10);
    const auto merged = specdyn::ProjectionEstimate::merge(ea, eb);

    Matrix from(16, 1), to(16, 1);
    from << a.topRows(10), b.topRows(6);
    to << a.bottomRows(10), b.bottomRows(6);
    // With a chunk of 10 the concatenated sum is (A) + (B), the same order as the merge.
    const auto joint = specdyn::accumulate_pairs(from, to, left, right, 10);
    EXPECT_EQ(merged.pair_count(), 16U);
    EXPECT_EQ(merged.pair_sum(), joint.pair_sum());
    EXPECT_EQ(merged.p_hat(), joint.p_hat());
}

TEST(Accumulate, MergeIsPairWeightedAverage) {
    const auto left = rff_basis(1, 14);
    testgen::Gen gen(15);
    const auto ea = specdyn::accumulate(gen.matrix(40, 1), left, left);
    const auto eb = specdyn::accumulate(gen.matrix(9, 1), left, left);
    const auto merged = specdyn::ProjectionEstimate::merge(ea, eb);
    const Matrix expected = (39.0 * ea.p_hat() + 8.0 * eb.p_hat()) / 47.0;
    EXPECT_LE((merged.p_hat() - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Accumulate, Errors) {
    const testgen::ScalarIdentityBasis phi;
    EXPECT_THROW(specdyn::accumulate(column({1}), phi, phi), specdyn::InvalidInput);
    EXPECT_THROW(specdyn::accumulate(Matrix::Zero(5, 2), phi, phi), specdyn::InvalidInput);
    EXPECT_THROW(specdyn::accumulate(column({1, 2}), phi, phi, 0), specdyn::InvalidInput);
    EXPECT_THROW(specdyn::accumulate(column({1, NAN}), phi, phi), specdyn::InvalidInput);
    const auto ea = specdyn::accumulate(column({1, 2}), phi, phi);
    const testgen::ScalarIdentityBasis other("other");
    const auto eb = specdyn::accumulate(column({1, 2}), other, phi);
    EXPECT_THROW(specdyn::ProjectionEstimate::merge(ea, eb), specdyn::InvalidInput);
}

TEST(Reshape, DiagonalTruncation) {
    const auto model = specdyn::reshape(diagonal_estimate({3, 2, 1}), 2);
    const Matrix expected = Vector((Vector(3) << 3, 2, 0).finished()).asDiagonal();
    EXPECT_LE((model.matrix() - expected).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_DOUBLE_EQ(model.residual_sigma, 1.0);
    EXPECT_EQ(model.rank, 2U);
}

TEST(Reshape, FullRankReproducesEstimate) {
    testgen::Gen gen(16);
    const Matrix p = gen.matrix(5, 4);
    const auto est = specdyn::ProjectionEstimate::from_average(p, 10, "l", "r");
    const auto model = specdyn::reshape(est, 4);
    EXPECT_LE((model.matrix() - p).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(model.residual_sigma, 0.0);
    EXPECT_EQ(model.pair_count, 10U);
    EXPECT_EQ(model.left_id, "l");
}

TEST(Reshape, RejectsRankOutOfRange) {
    EXPECT_THROW(specdyn::reshape(diagonal_estimate({3, 2, 1}), 0), specdyn::InvalidInput);
    EXPECT_THROW(specdyn::reshape(diagonal_estimate({3, 2, 1}), 4), specdyn::InvalidInput);
}

TEST(Reshape, SpectralResidualEqualsNextSingularValue) {
    testgen::Gen gen(17);
    for (int trial = 0; trial < 30; ++trial) {
        const auto rows = static_cast<Eigen::Index>(gen.between(2, 12));
        const auto cols = static_cast<Eigen::Index>(gen.between(2, 12));
        const Matrix p = gen.matrix(rows, cols);
        const auto r = gen.between(1, static_cast<std::size_t>(std::min(rows, cols)) - 1);
        const auto model = specdyn::reshape(specdyn::ProjectionEstimate::from_average(p, 1, "l", "r"), r);
        const Eigen::JacobiSVD<Matrix> full(p - model.matrix());
        EXPECT_NEAR(full.singularValues()(0), model.residual_sigma, 1e-10);
    }
}

TEST(Reshape, FactorsAreOrthonormal) {
    testgen::Gen gen(18);
    const Matrix p = gen.matrix(9, 7);
    const auto model = specdyn::reshape(specdyn::ProjectionEstimate::from_average(p, 1, "l", "r"), 4);
    EXPECT_LE((model.u.transpose() * model.u - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((model.v.transpose() * model.v - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
    for (Eigen::Index k = 0; k + 1 < 4; ++k) EXPECT_GE(model.sigma(k), model.sigma(k + 1));
    EXPECT_GT(model.sigma(3), 0.0);
}

TEST(Reshape, EckartYoungResidualSequence) {
    testgen::Gen gen(19);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix p = gen.matrix(8, 6);
        const auto est = specdyn::ProjectionEstimate::from_average(p, 1, "l", "r");
        const Eigen::JacobiSVD<Matrix> oracle(p);
        const Vector s = oracle.singularValues();
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t r = 1; r <= 6; ++r) {
            const double err = specdyn::embedding_error(specdyn::reshape(est, r), p);
            EXPECT_LE(err, prev + 1e-12);
            EXPECT_NEAR(err, s.tail(6 - static_cast<Eigen::Index>(r)).norm(), 1e-9);
            prev = err;
        }
    }
}

TEST(Reshape, RecoversExactLowRankChainProjection) {
    const auto chain = specdyn::random_lowrank_chain(8, 3, 20);
    const Matrix p = specdyn::chain_projection(chain);
    const auto model = specdyn::reshape(specdyn::ProjectionEstimate::from_average(p, 1, "l", "r"), 3);
    EXPECT_LE((model.matrix() - p).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KmeEvaluate, ZeroModelGivesZero) {
    const testgen::ScalarIdentityBasis phi;
    specdyn::ReshapedKernelModel model;
    model.u = Matrix::Ones(1, 1);
    model.v = Matrix::Ones(1, 1);
    model.sigma = Vector::Zero(1);
    model.rank = 1;
    model.left_id = model.right_id = phi.id();
    testgen::Gen gen(21);
    for (int i = 0; i < 10; ++i)
        EXPECT_EQ(specdyn::kme_evaluate(model, phi, phi, Vector::Constant(1, gen.normal()),
                                        Vector::Constant(1, gen.normal())),
                  0.0);
}

TEST(KmeEvaluate, ScalarArithmetic) {
    const testgen::ScalarIdentityBasis phi;
    const auto est = specdyn::ProjectionEstimate::from_average(Matrix::Constant(1, 1, 4.0), 1, phi.id(), phi.id());
    const auto model = specdyn::reshape(est, 1);
    EXPECT_DOUBLE_EQ(specdyn::kme_evaluate(model, phi, phi, Vector::Constant(1, 2.0), Vector::Constant(1, 3.0)),
                     24.0);
    EXPECT_DOUBLE_EQ(specdyn::kme_evaluate(est, phi, phi, Vector::Constant(1, 2.0), Vector::Constant(1, 3.0)),
                     24.0);
}

TEST(KmeEvaluate, FiniteChainMatchesBruteForceSum) {
    const auto chain = specdyn::random_lowrank_chain(6, 2, 22);
    const specdyn::IndicatorFeatures left(chain.stationary, "left");
    const specdyn::IndicatorFeatures right(Vector::Ones(6), "right");
    const auto est =
        specdyn::ProjectionEstimate::from_average(specdyn::chain_projection(chain), 1, left.id(), right.id());
    const auto model = specdyn::reshape(est, 2);
    // mu(x, y) = sum_{u, v} K(x, u) K(y, v) pi_u T_uv with the indicator kernel K(x, u) = [x = u].
    for (std::size_t x = 0; x < 6; ++x)
        for (std::size_t y = 0; y < 6; ++y) {
            double mu = 0.0;
            for (std::size_t u = 0; u < 6; ++u)
                for (std::size_t v = 0; v < 6; ++v)
                    if (u == x && v == y)
                        mu += chain.stationary(static_cast<Eigen::Index>(u)) *
                              chain.transition(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
            const double got = specdyn::kme_evaluate(model, left, right, specdyn::IndicatorFeatures::state(x),
                                                     specdyn::IndicatorFeatures::state(y));
            EXPECT_NEAR(got, mu, 1e-12);
        }
}

TEST(KmeEvaluate, RejectsMismatchedMaps) {
    const testgen::ScalarIdentityBasis phi;
    const testgen::ScalarIdentityBasis other("other");
    const auto est = specdyn::ProjectionEstimate::from_average(Matrix::Ones(1, 1), 1, phi.id(), phi.id());
    EXPECT_THROW(specdyn::kme_evaluate(specdyn::reshape(est, 1), other, phi, Vector::Zero(1), Vector::Zero(1)),
                 specdyn::InvalidInput);
    EXPECT_THROW(specdyn::kme_evaluate(est, phi, other, Vector::Zero(1), Vector::Zero(1)), specdyn::InvalidInput);
}

TEST(EmbeddingError, Examples) {
    const auto est = diagonal_estimate({3, 2, 1});
    EXPECT_EQ(specdyn::embedding_error(est, est.p_hat()), 0.0);
    Matrix ref = Matrix::Zero(3, 3);
    ref.diagonal() << 3, 2, 0;
    EXPECT_DOUBLE_EQ(specdyn::embedding_error(est, ref), 1.0);
    EXPECT_THROW(specdyn::embedding_error(Matrix::Zero(2, 3), Matrix::Zero(3, 2)), specdyn::InvalidInput);
}

TEST(EmbeddingError, MatchesElementwiseSumOfSquares) {
    testgen::Gen gen(23);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = gen.matrix(4, 7), b = gen.matrix(4, 7);
        double ss = 0.0;
        for (Eigen::Index i = 0; i < 4; ++i)
            for (Eigen::Index j = 0; j < 7; ++j) ss += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
        EXPECT_NEAR(specdyn::embedding_error(a, b), std::sqrt(ss), 1e-13);
    }
}

TEST(SuggestRank, PicksLargestRatio) {
    Vector s(5);
    s << 0.8, 0.75, 0.6, 0.02, 0.01;
    const auto g = specdyn::suggest_rank(s);
    EXPECT_EQ(g.rank, 3U);
    EXPECT_DOUBLE_EQ(g.gap, 30.0);
    Vector z(3);
    z << 1.0, 0.0, 0.0;
    EXPECT_EQ(specdyn::suggest_rank(z).rank, 1U);
    EXPECT_EQ(specdyn::suggest_rank(Vector::Ones(1)).rank, 0U);
}
