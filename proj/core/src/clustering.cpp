#include "specdyn/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "specdyn/error.hpp"

namespace specdyn {

WeightedPointSet WeightedPointSet::uniform(Matrix points) {
    WeightedPointSet out;
    out.weights = Vector::Ones(points.rows());
    out.points = std::move(points);
    return out;
}

void WeightedPointSet::validate() const {
    if (weights.size() != points.rows()) throw InvalidInput("WeightedPointSet: weights and points differ in length");
    if (points.rows() == 0 || points.cols() == 0) throw InvalidInput("WeightedPointSet: empty point set");
    require_finite(points, "WeightedPointSet points");
    require_finite(weights, "WeightedPointSet weights");
    if ((weights.array() < 0.0).any()) throw InvalidInput("WeightedPointSet: negative weight");
    if (!(weights.sum() > 0.0)) throw InvalidInput("WeightedPointSet: total weight must be positive");
}

namespace {

double squared_distance(const Matrix& points, Eigen::Index i, const Matrix& centroids, Eigen::Index k) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
        const double d = points(i, c) - centroids(k, c);
        s += d * d;
    }
    return s;
}

std::size_t nearest(const Matrix& points, Eigen::Index i, const Matrix& centroids) {
    std::size_t best = 0;
    double best_d = squared_distance(points, i, centroids, 0);
    for (Eigen::Index k = 1; k < centroids.rows(); ++k) {
        const double d = squared_distance(points, i, centroids, k);
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::size_t>(k);
        }
    }
    return best;
}

struct LloydRun {
    Matrix centroids;
    std::vector<std::size_t> labels;
    std::vector<double> trace;
    std::size_t iterations = 0;
};

LloydRun lloyd(const WeightedPointSet& pts, Matrix centroids, std::size_t max_iter) {
    const Eigen::Index n = pts.points.rows();
    const Eigen::Index m = centroids.rows();
    LloydRun run;
    std::vector<std::size_t> labels(static_cast<std::size_t>(n));
    std::vector<std::size_t> previous;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = nearest(pts.points, i, centroids);
        run.trace.push_back(kmeans_objective(pts.points, pts.weights, centroids, labels));
        run.iterations = iter + 1;
        if (labels == previous) break;

        Matrix sums = Matrix::Zero(m, pts.points.cols());
        Vector mass = Vector::Zero(m);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto k = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
            sums.row(k) += pts.weights(i) * pts.points.row(i);
            mass(k) += pts.weights(i);
        }
        // A cluster that lost all its mass keeps its previous centroid.
        for (Eigen::Index k = 0; k < m; ++k)
            if (mass(k) > 0.0) centroids.row(k) = sums.row(k) / mass(k);
        previous = labels;
        if (iter + 1 == max_iter) {
            for (Eigen::Index i = 0; i < n; ++i)
                labels[static_cast<std::size_t>(i)] = nearest(pts.points, i, centroids);
            run.trace.push_back(kmeans_objective(pts.points, pts.weights, centroids, labels));
        }
    }
    run.centroids = std::move(centroids);
    run.labels = std::move(labels);
    return run;
}

}  // namespace

double kmeans_objective(const Matrix& points, const Vector& weights, const Matrix& centroids,
                        std::span<const std::size_t> labels) {
    if (labels.size() != static_cast<std::size_t>(points.rows()) || weights.size() != points.rows())
        throw InvalidInput("kmeans_objective: length mismatch");
    double total = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const auto k = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
        if (k >= centroids.rows()) throw InvalidInput("kmeans_objective: label out of range");
        total += weights(i) * squared_distance(points, i, centroids, k);
    }
    return total;
}

ClusterModel weighted_kmeans(const WeightedPointSet& pts, std::size_t m, std::uint64_t seed,
                             const KMeansOptions& options) {
    pts.validate();
    if (m == 0) throw InvalidInput("weighted_kmeans: m must be at least 1");
    if (options.max_iter == 0 || options.n_restarts == 0)
        throw InvalidInput("weighted_kmeans: max_iter and n_restarts must be positive");
    const std::span<const double> w(pts.weights.data(), static_cast<std::size_t>(pts.weights.size()));
    const std::size_t distinct = count_distinct_points(pts.points, w);
    if (m > distinct)
        throw InvalidInput("weighted_kmeans: m = " + std::to_string(m) + " exceeds the " +
                           std::to_string(distinct) + " distinct points");

    Rng seeds(seed);
    ClusterModel best;
    best.objective = std::numeric_limits<double>::infinity();
    for (std::size_t restart = 0; restart < options.n_restarts; ++restart) {
        const std::uint64_t restart_seed = seeds.next_u64();
        LloydRun run = lloyd(pts, kmeans_pp_init(pts.points, w, m, restart_seed), options.max_iter);
        const double objective = run.trace.back();
        if (objective < best.objective) {
            best.centroids = std::move(run.centroids);
            best.objective = objective;
            best.iterations_run = run.iterations;
            best.labels = std::move(run.labels);
            best.objective_trace = std::move(run.trace);
        }
    }
    best.seed = seed;
    return best;
}

std::size_t assign(const ClusterModel& model, const Vector& psi) {
    if (psi.size() != model.centroids.cols()) throw InvalidInput("assign: dimension mismatch");
    if (model.centroids.rows() == 0) throw InvalidInput("assign: model has no centroids");
    const Matrix row = psi.transpose();
    return nearest(row, 0, model.centroids);
}

std::vector<std::size_t> assign_rows(const ClusterModel& model, const Matrix& points) {
    if (points.cols() != model.centroids.cols()) throw InvalidInput("assign: dimension mismatch");
    if (model.centroids.rows() == 0) throw InvalidInput("assign: model has no centroids");
    std::vector<std::size_t> out(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) out[static_cast<std::size_t>(i)] = nearest(points, i, model.centroids);
    return out;
}

PartitionComparison misclassification(std::span<const std::size_t> predicted,
                                       std::span<const std::size_t> reference, std::span<const double> weights) {
    if (predicted.size() != reference.size() || weights.size() != reference.size())
        throw InvalidInput("misclassification: length mismatch");
    if (reference.empty()) throw InvalidInput("misclassification: no points");
    std::size_t m = 0;
    for (std::size_t label : reference) m = std::max(m, label + 1);

    Matrix overlap = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    Vector class_mass = Vector::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < reference.size(); ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
            throw InvalidInput("misclassification: weights must be finite and nonnegative");
        if (predicted[i] >= m)
            throw InvalidInput("misclassification: predicted label " + std::to_string(predicted[i]) +
                               " exceeds the " + std::to_string(m) + " reference classes");
        const auto j = static_cast<Eigen::Index>(reference[i]);
        overlap(j, static_cast<Eigen::Index>(predicted[i])) += weights[i];
        class_mass(j) += weights[i];
    }
    for (Eigen::Index j = 0; j < class_mass.size(); ++j)
        if (!(class_mass(j) > 0.0))
            throw InvalidInput("misclassification: reference class " + std::to_string(j) + " is empty");

    Matrix cost(overlap.rows(), overlap.cols());
    for (Eigen::Index j = 0; j < cost.rows(); ++j)
        for (Eigen::Index k = 0; k < cost.cols(); ++k) cost(j, k) = (class_mass(j) - overlap(j, k)) / class_mass(j);

    const Assignment match = min_cost_permutation(cost);
    PartitionComparison out;
    out.permutation = match.permutation;
    for (std::size_t j = 0; j < m; ++j)
        out.rate += cost(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(match.permutation[j]));
    return out;
}

MetastabilityReport metastability_score(std::span<const std::size_t> labels, std::size_t m) {
    if (labels.size() < 2) throw InvalidInput("metastability_score: need at least 2 labels");
    if (m == 0) throw InvalidInput("metastability_score: m must be at least 1");
    std::vector<std::size_t> starts(m, 0), stays(m, 0);
    for (std::size_t t = 0; t + 1 < labels.size(); ++t) {
        if (labels[t] >= m || labels[t + 1] >= m) throw InvalidInput("metastability_score: label out of range");
        ++starts[labels[t]];
        if (labels[t + 1] == labels[t]) ++stays[labels[t]];
    }
    MetastabilityReport out;
    out.self_transition.assign(m, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < m; ++k) {
        if (starts[k] == 0) {
            out.all_visited = false;
            continue;
        }
        out.self_transition[k] = static_cast<double>(stays[k]) / static_cast<double>(starts[k]);
        out.score += out.self_transition[k];
    }
    return out;
}

}  // namespace specdyn
