#include "specdyn/commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "specdyn/error.hpp"
#include "specdyn/oracle.hpp"
#include "specdyn/simulator.hpp"

namespace specdyn {

namespace fs = std::filesystem;

namespace {

// Leading singular values searched for the spectral-gap suggestion.
constexpr Eigen::Index kGapWindow = 10;

void write_resolved(const RunConfig& config, const fs::path& out_dir, const char* command) {
    write_text_file(out_dir / (std::string(command) + ".resolved_config.json"), resolved_config_json(config));
}

fs::path trajectory_path(const RunConfig& config, const fs::path& out_dir) {
    return out_dir / config.paths.trajectory;
}

std::string fixed(double v, int precision = 6) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

}  // namespace

FittedModel fit_model(const Matrix& states, const FeatureConfig& features, std::size_t rank) {
    GaussianKernelSpec spec;
    spec.bandwidth = features.bandwidth;
    spec.dim = static_cast<std::size_t>(states.cols());
    const RawFeatureMap raw = sample_rff(spec, features.n_features, features.seed);
    const BasisOptions options = features.basis_options();
    OrthoFeatureMap left = build_left_basis(raw, states, options);
    OrthoFeatureMap right = build_right_basis(raw, states, options);
    const std::size_t achieved = std::min(left.size(), right.size());
    if (rank > achieved)
        throw ConfigError("estimation.rank = " + std::to_string(rank) + " exceeds the J = " +
                          std::to_string(achieved) + " features retained after thresholding (left " +
                          std::to_string(left.size()) + ", right " + std::to_string(right.size()) + ")");
    ProjectionEstimate estimate = accumulate(states, left, right);
    ReshapedKernelModel reshaped = reshape(estimate, rank);
    Embedder embedder = fit_embedder(estimate, left, right, rank);
    return FittedModel{std::move(left), std::move(right), std::move(estimate), std::move(reshaped),
                       std::move(embedder)};
}

ClusterModel cluster_embedding(const Matrix& psi, std::size_t m, const ClusteringConfig& config) {
    const WeightedPointSet pts = WeightedPointSet::uniform(psi);
    const std::span<const double> w(pts.weights.data(), static_cast<std::size_t>(pts.weights.size()));
    const std::size_t distinct = count_distinct_points(pts.points, w);
    if (m > distinct)
        throw ConfigError("clustering.m = " + std::to_string(m) + " exceeds the " + std::to_string(distinct) +
                          " distinct embedded points");
    KMeansOptions options;
    options.max_iter = config.max_iter;
    options.n_restarts = config.restarts;
    return weighted_kmeans(pts, m, config.seed, options);
}

std::vector<std::size_t> basin_labels(const MultiWell1d& wells, const Matrix& states) {
    if (states.cols() != 1) throw InvalidInput("basin_labels: states must be one-dimensional");
    std::vector<std::size_t> out(static_cast<std::size_t>(states.rows()));
    for (Eigen::Index t = 0; t < states.rows(); ++t) out[static_cast<std::size_t>(t)] = wells.basin_label(states(t, 0));
    return out;
}

SimulateSummary run_simulate(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
    const SimulationConfig& sim = config.require_simulation();
    const Trajectory traj = simulate(sim.potential.spec(), sim.options());
    SimulateSummary summary;
    summary.length = traj.length();
    summary.dim = traj.dim();
    summary.output = trajectory_path(config, out_dir);
    write_trajectory(summary.output, traj, sim.format);
    write_resolved(config, out_dir, "simulate");

    log << "trajectory: T = " << summary.length << ", d = " << summary.dim
        << ", tau = " << fixed(traj.sample_interval) << ", inner steps = " << traj.inner_steps << "\n";
    log << "wrote " << summary.output.string() << "\n";
    if (const auto wells = sim.potential.wells()) {
        const auto labels = basin_labels(*wells, traj.states);
        summary.basin_occupancy.assign(wells->basin_count(), 0.0);
        for (std::size_t l : labels) summary.basin_occupancy[l] += 1.0;
        log << "basin occupancy:";
        for (auto& share : summary.basin_occupancy) {
            share /= static_cast<double>(labels.size());
            log << " " << fixed(share, 4);
        }
        log << "\n";
    }
    return summary;
}

FitSummary run_fit(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
    const FeatureConfig& features = config.require_features();
    const EstimationConfig& estimation = config.require_estimation();
    const Trajectory traj = read_trajectory(trajectory_path(config, out_dir));
    if (traj.length() < 2) throw InvalidInput("fit: trajectory needs at least 2 states");
    const FittedModel model = fit_model(traj.states, features, estimation.rank);

    save_feature_map(out_dir / "left_features.json", model.left);
    save_feature_map(out_dir / "right_features.json", model.right);
    save_projection(out_dir / "projection.json", model.estimate);
    save_reshaped(out_dir / "reshaped.json", model.reshaped);
    save_embedder(out_dir / "embedder.json", model.embedder);

    FitSummary summary;
    summary.left_size = model.left.size();
    summary.right_size = model.right.size();
    summary.sigma = whitened_spectrum(model.estimate.p_hat(), model.left, model.right);
    summary.reshaped_sigma = model.reshaped.sigma;
    summary.suggestion = suggest_rank(summary.sigma.head(std::min(kGapWindow, summary.sigma.size())));

    const Matrix probes = traj.dim() == 1
                              ? probe_grid(traj.states.minCoeff(), traj.states.maxCoeff())
                              : subsample_rows(traj.states, 1000);
    write_embedding_csv(out_dir / "embedding.csv", probes, embed_rows(model.embedder, model.left, probes));
    if (traj.dim() == 1)
        summary.negative_density_fraction =
            negative_density_fraction(model.embedder, model.left, model.right, probes);
    write_resolved(config, out_dir, "fit");

    log << "features: N = " << features.n_features << ", J = " << summary.left_size
        << " (left), " << summary.right_size << " (right), pairs n = " << model.estimate.pair_count() << "\n";
    log << "  k  sigma_k(whitened)  sigma_k(P_hat)\n";
    const Vector plain = thin_svd(model.estimate.p_hat()).singular_values;
    const Eigen::Index rows = std::min<Eigen::Index>(summary.sigma.size(),
                                                     std::max<Eigen::Index>(kGapWindow, static_cast<Eigen::Index>(estimation.rank) + 2));
    for (Eigen::Index k = 0; k < rows; ++k)
        log << std::setw(3) << k + 1 << "  " << std::setw(17) << fixed(summary.sigma(k), 8) << "  "
            << std::setw(14) << fixed(plain(k), 8) << (k < static_cast<Eigen::Index>(estimation.rank) ? "  *" : "")
            << "\n";
    log << "largest spectral gap among the leading " << std::min(kGapWindow, summary.sigma.size())
        << ": rank " << summary.suggestion.rank << " (ratio " << fixed(summary.suggestion.gap, 4)
        << "); using rank " << estimation.rank << "\n";
    if (summary.negative_density_fraction)
        log << "negative recovered density on the probe grid: " << fixed(*summary.negative_density_fraction, 4)
            << "\n";
    return summary;
}

ClusterSummary run_cluster(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
    const ClusteringConfig& clustering = config.require_clustering();
    const Trajectory traj = read_trajectory(trajectory_path(config, out_dir));
    const OrthoFeatureMap left = load_feature_map(out_dir / "left_features.json");
    const Embedder embedder = load_embedder(out_dir / "embedder.json");
    const Matrix psi = embed_rows(embedder, left, traj.states);

    std::optional<std::vector<std::size_t>> reference;
    if (config.simulation && traj.dim() == 1)
        if (const auto wells = config.simulation->potential.wells()) reference = basin_labels(*wells, traj.states);

    ClusterSummary summary;
    for (std::size_t m : clustering.m) {
        ClusterReport report;
        report.model = cluster_embedding(psi, m, clustering);
        report.metastability = metastability_score(report.model.labels, m);
        if (reference) {
            const std::vector<double> weights(reference->size(), 1.0);
            std::size_t classes = 0;
            for (std::size_t l : *reference) classes = std::max(classes, l + 1);
            if (m <= classes) {
                try {
                    report.comparison = misclassification(report.model.labels, *reference, weights);
                } catch (const InvalidInput& e) {
                    log << "m = " << m << ": misclassification skipped (" << e.what() << ")\n";
                }
            }
        }
        const std::string tag = "m" + std::to_string(m);
        write_labels_csv(out_dir / ("labels_" + tag + ".csv"), traj.states, report.model.labels);
        save_cluster_report(out_dir / ("clusters_" + tag + ".json"), report);

        log << "m = " << m << ": objective " << fixed(report.model.objective, 8) << ", metastability "
            << fixed(report.metastability.score, 5) << " of " << m
            << (report.metastability.all_visited ? "" : " (some clusters unvisited)");
        if (report.comparison) log << ", misclassification M = " << fixed(report.comparison->rate, 5);
        log << "\n";

        ClusterRun run;
        run.m = m;
        run.objective = report.model.objective;
        run.metastability = report.metastability;
        run.comparison = report.comparison;
        summary.runs.push_back(std::move(run));
    }
    write_resolved(config, out_dir, "cluster");
    return summary;
}

BenchmarkSummary run_benchmark(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
    const SimulationConfig& sim = config.require_simulation();
    const FeatureConfig& features = config.require_features();
    const EstimationConfig& estimation = config.require_estimation();
    const BenchmarkConfig& bench = config.require_benchmark();
    const PotentialSpec spec = sim.potential.spec();

    SimulationOptions basis_run = sim.options();
    basis_run.n_samples = bench.basis_samples;
    basis_run.seed = bench.basis_seed;
    const Trajectory basis_traj = simulate(spec, basis_run);
    GaussianKernelSpec kernel;
    kernel.bandwidth = features.bandwidth;
    kernel.dim = spec.dim;
    const RawFeatureMap raw = sample_rff(kernel, features.n_features, features.seed);
    const OrthoFeatureMap left = build_left_basis(raw, basis_traj.states, features.basis_options());
    const OrthoFeatureMap right = build_right_basis(raw, basis_traj.states, features.basis_options());
    if (estimation.rank > std::min(left.size(), right.size()))
        throw ConfigError("estimation.rank = " + std::to_string(estimation.rank) + " exceeds the J = " +
                          std::to_string(std::min(left.size(), right.size())) + " retained features");

    BenchmarkSummary summary;
    summary.left_size = left.size();
    summary.right_size = right.size();
    log << "basis: N = " << features.n_features << ", J = " << left.size() << " (left), " << right.size()
        << " (right)\n";

    std::optional<Matrix> grid_ref;
    std::optional<Matrix> long_ref;
    if (bench.reference != BenchmarkConfig::Reference::LongRun) {
        if (spec.dim != 1) throw ConfigError("benchmark.reference = grid requires a one-dimensional potential");
        double grid_dt = sim.inner_dt;
        std::size_t grid_stride = sim.stride;
        if (bench.grid_dt > 0.0) {
            const double tau = sim.sample_interval();
            const double steps = std::round(tau / bench.grid_dt);
            if (steps < 1.0 || std::abs(steps * bench.grid_dt - tau) > 1e-9 * tau)
                throw ConfigError("benchmark.grid_dt must divide the sample interval");
            grid_dt = bench.grid_dt;
            grid_stride = static_cast<std::size_t>(steps);
        }
        const ReferenceProjection ref = euler_grid_reference(spec, grid_dt, grid_stride, bench.grid_lo,
                                                             bench.grid_hi, bench.grid_count, left, right);
        grid_ref = ref.projection;
        summary.grid_refinement_error = ref.refinement_error;
        log << "grid reference: " << bench.grid_count << " nodes, |P*| = " << fixed(ref.projection.norm())
            << ", half-resolution change " << fixed(ref.refinement_error, 4) << "\n";
    }
    if (bench.reference != BenchmarkConfig::Reference::Grid) {
        SimulationOptions ref_run = sim.options();
        ref_run.n_samples = bench.n_ref + 1;
        ref_run.seed = bench.reference_seed;
        long_ref = accumulate(simulate(spec, ref_run).states, left, right).p_hat();
        log << "long-run reference: n = " << bench.n_ref << ", |P*| = " << fixed(long_ref->norm()) << "\n";
    }
    if (grid_ref && long_ref) {
        summary.reference_gap = (*grid_ref - *long_ref).norm();
        log << "grid vs long-run reference: " << fixed(*summary.reference_gap, 4) << "\n";
    }
    const Matrix& reference = grid_ref ? *grid_ref : *long_ref;
    summary.reference_norm = reference.norm();

    for (std::size_t n : bench.n_values) {
        std::vector<double> plain, reshaped;
        for (std::uint64_t seed : bench.seeds) {
            SimulationOptions run = sim.options();
            run.n_samples = n + 1;
            run.seed = mix_seed(seed, n);
            const ProjectionEstimate est = accumulate(simulate(spec, run).states, left, right);
            BenchmarkRow row;
            row.n = n;
            row.seed = seed;
            row.error_plain = embedding_error(est, reference);
            row.error_reshaped = embedding_error(reshape(est, estimation.rank), reference);
            plain.push_back(row.error_plain);
            reshaped.push_back(row.error_reshaped);
            summary.rows.push_back(row);
        }
        summary.n_values.push_back(n);
        summary.median_plain.push_back(median(plain));
        summary.median_reshaped.push_back(median(reshaped));
    }

    log << "        n   median plain   median reshaped\n";
    for (std::size_t i = 0; i < summary.n_values.size(); ++i)
        log << std::setw(9) << summary.n_values[i] << "  " << std::setw(13) << fixed(summary.median_plain[i])
            << "  " << std::setw(16) << fixed(summary.median_reshaped[i]) << "\n";
    if (summary.n_values.size() >= 2) {
        std::vector<double> logn, lp, lr;
        for (std::size_t i = 0; i < summary.n_values.size(); ++i) {
            logn.push_back(std::log(static_cast<double>(summary.n_values[i])));
            lp.push_back(std::log(summary.median_plain[i]));
            lr.push_back(std::log(summary.median_reshaped[i]));
        }
        summary.slope_plain = least_squares_slope(logn, lp);
        summary.slope_reshaped = least_squares_slope(logn, lr);
        log << "log-log slope: reshaped " << fixed(summary.slope_reshaped, 4) << ", plain "
            << fixed(summary.slope_plain, 4) << "\n";
    } else {
        summary.slope_plain = summary.slope_reshaped = std::numeric_limits<double>::quiet_NaN();
    }

    write_benchmark_csv(out_dir / "benchmark.csv", summary.rows);
    write_resolved(config, out_dir, "benchmark");
    return summary;
}

}  // namespace specdyn
