// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "specdyn/commands.hpp"
#include "specdyn/config.hpp"
#include "specdyn/oracle.hpp"

using specdyn::Matrix;
using specdyn::Vector;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failures;
}

std::string num(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

// 50 random low-rank chains pushed through reshaping and embedding on their exact P*.
Outcome finite_chain_exactness() {
    const auto start = Clock::now();
    testgen::Gen gen(2024);
    double worst_p = 0.0, worst_dist = 0.0, worst_density = 0.0;
    for (int c = 0; c < 50; ++c) {
        const std::size_t s = gen.between(2, 10);
        const std::size_t r = gen.between(1, s);
        const auto chain = specdyn::random_lowrank_chain(s, r, 1000 + static_cast<std::uint64_t>(c));
        const specdyn::IndicatorFeatures left(chain.stationary, "left");
        const specdyn::IndicatorFeatures right(Vector::Ones(static_cast<Eigen::Index>(s)), "right");
        const Matrix p = specdyn::chain_projection(chain);
        const auto est = specdyn::ProjectionEstimate::from_average(p, 1, left.id(), right.id());
        const auto reshaped = specdyn::reshape(est, r);
        worst_p = std::max(worst_p, (reshaped.matrix() - p).cwiseAbs().maxCoeff());

        const auto e = specdyn::fit_embedder(est, left, right, r);
        const Matrix dist = specdyn::chain_diffusion_distances(chain);
        for (std::size_t i = 0; i < s; ++i) {
            const Vector xi = specdyn::IndicatorFeatures::state(i);
            for (std::size_t j = 0; j < s; ++j) {
                const Vector xj = specdyn::IndicatorFeatures::state(j);
                const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                worst_dist = std::max(worst_dist, std::abs(specdyn::diffusion_distance(e, left, xi, xj) - dist(ii, jj)));
                worst_density = std::max(
                    worst_density, std::abs(specdyn::recover_density(e, left, right, xi, xj) - chain.transition(ii, jj)));
            }
        }
    }
    const double elapsed = seconds_since(start);
    Outcome o;
    o.pass = worst_p <= 1e-12 && worst_dist <= 1e-9 && worst_density <= 1e-10 && elapsed < 10.0;
    o.detail = "max|P~-P*| " + num(worst_p) + ", max distance error " + num(worst_dist) + ", max density error " +
               num(worst_density) + ", " + num(elapsed) + " s";
    return o;
}

const char* kBenchmarkConfig = R"({
  "simulation": {"potential": {"family": "four_well"}, "inner_dt": 0.001, "stride": 1000, "n_samples": 2,
                 "burn_in": 100000, "seed": 1},
  "features": {"bandwidth": 0.1, "n_features": 2000, "seed": 2, "quadrature_seed": 3},
  "estimation": {"rank": 4},
  "benchmark": {"n_values": [1000, 3000, 10000, 30000, 100000], "seeds": [1, 2, 3, 4, 5],
                "reference": "grid", "grid_count": 401, "reference_seed": 9,
                "basis_samples": 100000, "basis_seed": 7}
})";

void reshaping_benchmark() {
    const auto start = Clock::now();
    testgen::TempDir dir;
    std::ostringstream log;
    const auto summary = specdyn::run_benchmark(specdyn::parse_config(kBenchmarkConfig), dir.path(), log);
    const double elapsed = seconds_since(start);

    Outcome beats;
    std::string medians;
    for (std::size_t k = 0; k < summary.n_values.size(); ++k) {
        if (summary.median_reshaped[k] > summary.median_plain[k]) beats.pass = false;
        medians += " n=" + std::to_string(summary.n_values[k]) + " " + num(summary.median_reshaped[k]) + "/" +
                   num(summary.median_plain[k]);
    }
    if (elapsed >= 600.0) beats.pass = false;
    beats.detail = "median reshaped/plain:" + medians + ", " + num(elapsed) + " s";
    report(2, "reshaped error <= plain error at every n", beats);

    Outcome rate;
    rate.pass = summary.slope_reshaped >= -0.65 && summary.slope_reshaped <= -0.35;
    rate.detail = "log-log slope " + num(summary.slope_reshaped) + " (plain " + num(summary.slope_plain) + ")";
    report(3, "reshaped error rate near n^-1/2", rate);
}

std::string clustering_config(std::uint64_t seed) {
    return R"({"simulation": {"potential": {"family": "four_well"}, "inner_dt": 0.001, "stride": 1000,
               "n_samples": 100001, "burn_in": 100000, "seed": )" +
           std::to_string(seed) + R"(},
               "features": {"bandwidth": 0.1, "n_features": 2000, "seed": 2, "quadrature_seed": 3},
               "estimation": {"rank": 4}, "clustering": {"m": [4], "seed": 4}})";
}

Outcome metastable_recovery() {
    const auto start = Clock::now();
    std::vector<double> rates, scores;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto config = specdyn::parse_config(clustering_config(seed));
        const auto& sim = config.require_simulation();
        const auto traj = specdyn::simulate(sim.potential.spec(), sim.options());
        const auto model = specdyn::fit_model(traj.states, config.require_features(), 4);
        const Matrix psi = specdyn::embed_rows(model.embedder, model.left, traj.states);
        const auto clusters = specdyn::cluster_embedding(psi, 4, config.require_clustering());
        const auto reference = specdyn::basin_labels(*sim.potential.wells(), traj.states);
        const std::vector<double> weights(reference.size(), 1.0);
        rates.push_back(specdyn::misclassification(clusters.labels, reference, weights).rate);
        scores.push_back(specdyn::metastability_score(clusters.labels, 4).score);
    }
    const double m = specdyn::median(rates);
    const double score = specdyn::median(scores);
    Outcome o;
    o.pass = m <= 0.2 && score >= 3.0;
    o.detail = "median M " + num(m) + ", median metastability " + num(score) + " of 4 (per seed M:";
    for (double r : rates) o.detail += " " + num(r);
    o.detail += "; score:";
    for (double s : scores) o.detail += " " + num(s);
    o.detail += "), " + num(seconds_since(start)) + " s";
    return o;
}

// Compact property sweep; the unit suites hold the wider versions.
Outcome property_suites() {
    const auto start = Clock::now();
    testgen::Gen gen(77);
    std::vector<std::string> failed;
    auto check = [&failed](bool ok, const std::string& what) {
        if (!ok) failed.push_back(what);
    };

    bool svd_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const auto rows = static_cast<Eigen::Index>(gen.between(2, 12));
        const auto cols = static_cast<Eigen::Index>(gen.between(2, 12));
        const Matrix a = gen.lowrank(rows, cols, 2) + gen.matrix(rows, cols, 0.05);
        const std::size_t r = gen.between(1, static_cast<std::size_t>(std::min(rows, cols)) - 1);
        const auto model = specdyn::reshape(specdyn::ProjectionEstimate::from_average(a, 1, "l", "r"), r);
        const Vector s = specdyn::thin_svd(a).singular_values;
        svd_ok &= std::abs(specdyn::spectral_norm(a - model.matrix()) - s(static_cast<Eigen::Index>(r))) <= 1e-10;
    }
    check(svd_ok, "SVD truncation identity");

    bool lloyd_ok = true, m_ok = true;
    for (int trial = 0; trial < 30; ++trial) {
        const auto n = static_cast<Eigen::Index>(gen.between(20, 200));
        const std::size_t m = gen.between(1, 6);
        const auto model = specdyn::weighted_kmeans(specdyn::WeightedPointSet::uniform(gen.matrix(n, 3)), m,
                                                    static_cast<std::uint64_t>(trial));
        for (std::size_t i = 1; i < model.objective_trace.size(); ++i)
            lloyd_ok &= model.objective_trace[i] <= model.objective_trace[i - 1] * (1.0 + 1e-12);

        std::vector<std::size_t> ref(static_cast<std::size_t>(n)), pred(ref.size());
        std::vector<double> w(ref.size());
        for (std::size_t t = 0; t < ref.size(); ++t) {
            ref[t] = t < m ? t : gen.index(m);
            pred[t] = gen.index(m);
            w[t] = gen.uniform(0.1, 2.0);
        }
        const double rate = specdyn::misclassification(pred, ref, w).rate;
        const auto perm = gen.permutation(m);
        std::vector<std::size_t> relabeled(pred.size());
        for (std::size_t t = 0; t < pred.size(); ++t) relabeled[t] = perm[pred[t]];
        m_ok &= rate >= 0.0 && rate <= static_cast<double>(m) &&
                std::abs(specdyn::misclassification(relabeled, ref, w).rate - rate) <= 1e-12;
    }
    check(lloyd_ok, "Lloyd objective monotonicity");
    check(m_ok, "misclassification range and permutation invariance");

    bool hungarian_ok = true;
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = static_cast<Eigen::Index>(gen.between(1, 6));
        const Matrix cost = gen.matrix(m, m).cwiseAbs();
        hungarian_ok &= std::abs(specdyn::min_cost_permutation(cost).total_cost -
                                 testgen::brute_force_assignment(cost)) <= 1e-12;
    }
    check(hungarian_ok, "Hungarian matches exhaustive search");

    bool grad_ok = true;
    const std::vector<specdyn::PotentialSpec> potentials = {
        {specdyn::PotentialFamily::Quadratic, {1.5}, 2},
        {specdyn::PotentialFamily::Polynomial, {0.0, -1.0, 0.5, 0.3, 0.25}, 1},
        {specdyn::PotentialFamily::GaussianMixture2d, {0.1, 1.0, -1.0, 0.0, 0.5, 1.0, 1.0, 0.0, 0.5, 0.5, 0.0, 1.5, 0.6}, 2},
        specdyn::four_well_1d().spec,
    };
    for (const auto& spec : potentials) {
        for (int trial = 0; trial < 20; ++trial) {
            const Vector x = gen.vector(static_cast<Eigen::Index>(spec.dim), -1.8, 1.8);
            const Vector g = specdyn::potential_grad(spec, x).gradient;
            for (Eigen::Index k = 0; k < x.size(); ++k) {
                const double h = 1e-5;
                Vector xp = x, xm = x;
                xp(k) += h;
                xm(k) -= h;
                const double fd =
                    (specdyn::potential_grad(spec, xp).value - specdyn::potential_grad(spec, xm).value) / (2 * h);
                grad_ok &= std::abs(fd - g(k)) <= 1e-5 * std::max(1.0, std::abs(g(k)));
            }
        }
    }
    check(grad_ok, "gradient vs finite differences");

    const specdyn::PotentialSpec flat{specdyn::PotentialFamily::Quadratic, {0.0}, 1};
    specdyn::SimulationOptions bm;
    bm.x0 = Vector::Zero(1);
    bm.inner_dt = 1e-3;
    bm.stride = 1000;
    bm.n_samples = 20001;
    bm.burn_in = 0;
    bm.seed = 31;
    const auto walk = specdyn::simulate(flat, bm);
    const Vector inc = walk.states.bottomRows(20000).col(0) - walk.states.topRows(20000).col(0);
    const double bm_var = (inc.array() - inc.mean()).square().mean();
    check(std::abs(bm_var - 2.0) <= 0.1, "Brownian variance " + num(bm_var));

    const specdyn::PotentialSpec ou{specdyn::PotentialFamily::Quadratic, {1.0}, 1};
    specdyn::SimulationOptions ou_opts = bm;
    ou_opts.burn_in = 10000;
    ou_opts.seed = 32;
    const auto ou_traj = specdyn::simulate(ou, ou_opts);
    const Vector col = ou_traj.states.col(0);
    const double ou_var = (col.array() - col.mean()).square().mean();
    check(std::abs(ou_var - 1.0) <= 0.05, "OU stationary variance " + num(ou_var));

    ou_opts.n_samples = 2000;
    const auto again_a = specdyn::simulate(specdyn::four_well_1d().spec, ou_opts);
    const auto again_b = specdyn::simulate(specdyn::four_well_1d().spec, ou_opts);
    bool same = again_a.states.size() == again_b.states.size();
    for (Eigen::Index i = 0; same && i < again_a.states.size(); ++i)
        same = std::memcmp(again_a.states.data() + i, again_b.states.data() + i, sizeof(double)) == 0;
    check(same, "byte-identical reruns");

    const double elapsed = seconds_since(start);
    check(elapsed < 60.0, "runtime");
    Outcome o;
    o.pass = failed.empty();
    o.detail = (failed.empty() ? std::string("all properties hold") : "failed:");
    for (const auto& f : failed) o.detail += " [" + f + "]";
    o.detail += ", " + num(elapsed) + " s";
    return o;
}

}  // namespace

int main() {
    try {
        report(1, "finite-chain exactness", finite_chain_exactness());
        reshaping_benchmark();
        report(4, "metastable recovery on the four-well potential", metastable_recovery());
        report(5, "property suites", property_suites());
    } catch (const std::exception& e) {
        std::cout << "FAIL acceptance run aborted: " << e.what() << std::endl;
        return 1;
    }
    std::cout << "PASS [6] documented exclusion: theoretical constants and bounds, Atari embeddings, the exact 2-d potential "
                 "geometry; not checked at desk scale"
              << std::endl;
    return failures == 0 ? 0 : 1;
}
