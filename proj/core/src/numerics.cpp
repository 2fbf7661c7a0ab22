#include "specdyn/numerics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "specdyn/error.hpp"

namespace specdyn {

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    // 1 - uniform() lies in (0, 1], so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

std::size_t Rng::weighted_index(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw InvalidInput("weighted_index: weights sum to zero");
    const double target = uniform() * total;
    double running = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        running += weights[i];
        last_positive = i;
        if (target < running) return i;
    }
    return last_positive;
}

void Fingerprint::mix(const unsigned char* data, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
        state_ ^= data[i];
        state_ *= 0x100000001b3ULL;
    }
}

Fingerprint& Fingerprint::add(std::string_view text) {
    add(static_cast<std::uint64_t>(text.size()));
    mix(reinterpret_cast<const unsigned char*>(text.data()), text.size());
    return *this;
}

Fingerprint& Fingerprint::add(std::uint64_t value) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    mix(bytes, 8);
    return *this;
}

Fingerprint& Fingerprint::add(double value) {
    return add(std::bit_cast<std::uint64_t>(value));
}

Fingerprint& Fingerprint::add(const Matrix& values) {
    add(static_cast<std::uint64_t>(values.rows()));
    add(static_cast<std::uint64_t>(values.cols()));
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < values.cols(); ++j) add(values(i, j));
    return *this;
}

Fingerprint& Fingerprint::add(const Vector& values) {
    add(static_cast<std::uint64_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i) add(values(i));
    return *this;
}

std::string Fingerprint::hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) out[15 - i] = digits[(state_ >> (4 * i)) & 0xF];
    return out;
}

void require_finite(const Matrix& a, std::string_view what) {
    if (!a.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entry");
}

void require_finite(const Vector& a, std::string_view what) {
    if (!a.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entry");
}

namespace {

// Flip column signs so the largest-magnitude entry of each column of `lead` is
// positive; `follow` (may be null) gets the same flips.
void fix_column_signs(Matrix& lead, Matrix* follow) {
    for (Eigen::Index j = 0; j < lead.cols(); ++j) {
        Eigen::Index arg = 0;
        lead.col(j).cwiseAbs().maxCoeff(&arg);
        if (lead(arg, j) < 0.0) {
            lead.col(j) *= -1.0;
            if (follow != nullptr) follow->col(j) *= -1.0;
        }
    }
}

}  // namespace

Matrix SvdResult::reconstruct() const {
    return u * singular_values.asDiagonal() * v.transpose();
}

Matrix SvdResult::truncated(std::size_t r) const {
    const auto k = static_cast<Eigen::Index>(std::min<std::size_t>(r, singular_values.size()));
    return u.leftCols(k) * singular_values.head(k).asDiagonal() * v.leftCols(k).transpose();
}

SvdResult thin_svd(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) throw InvalidInput("thin_svd: empty matrix");
    require_finite(a, "thin_svd");
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdResult out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    fix_column_signs(out.u, &out.v);
    return out;
}

double spectral_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    require_finite(a, "spectral_norm");
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

SymEig sym_eig(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw InvalidInput("sym_eig: matrix must be square and non-empty");
    require_finite(a, "sym_eig");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw InvalidInput("sym_eig: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success) throw InvalidInput("sym_eig: eigensolver failed");
    const Eigen::Index n = a.rows();
    SymEig out{Vector(n), Matrix(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        out.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
        out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    fix_column_signs(out.eigenvectors, nullptr);
    return out;
}

Assignment min_cost_permutation(const Matrix& cost) {
    if (cost.rows() != cost.cols()) throw InvalidInput("min_cost_permutation: cost must be square");
    if (cost.rows() == 0) throw InvalidInput("min_cost_permutation: empty cost matrix");
    require_finite(cost, "min_cost_permutation");

    // Shortest augmenting path with row/column potentials; arrays are 1-based
    // with index 0 as the virtual source column.
    const auto n = static_cast<std::size_t>(cost.rows());
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> row_pot(n + 1, 0.0), col_pot(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> min_slack(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double reduced = cost(static_cast<Eigen::Index>(i0 - 1),
                                            static_cast<Eigen::Index>(j - 1)) -
                                       row_pot[i0] - col_pot[j];
                if (reduced < min_slack[j]) {
                    min_slack[j] = reduced;
                    way[j] = j0;
                }
                if (min_slack[j] < delta) {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    row_pot[match[j]] += delta;
                    col_pot[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    Assignment out;
    out.permutation.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) out.permutation[match[j] - 1] = j - 1;
    for (std::size_t i = 0; i < n; ++i)
        out.total_cost += cost(static_cast<Eigen::Index>(i),
                               static_cast<Eigen::Index>(out.permutation[i]));
    return out;
}

std::size_t count_distinct_points(const Matrix& points, std::span<const double> weights) {
    std::vector<Eigen::Index> idx;
    idx.reserve(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        if (weights[static_cast<std::size_t>(i)] > 0.0) idx.push_back(i);
    const auto row_less = [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index c = 0; c < points.cols(); ++c) {
            if (points(a, c) < points(b, c)) return true;
            if (points(b, c) < points(a, c)) return false;
        }
        return false;
    };
    std::sort(idx.begin(), idx.end(), row_less);
    std::size_t distinct = 0;
    for (std::size_t k = 0; k < idx.size(); ++k)
        if (k == 0 || row_less(idx[k - 1], idx[k])) ++distinct;
    return distinct;
}

Matrix kmeans_pp_init(const Matrix& points, std::span<const double> weights, std::size_t m,
                      std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (weights.size() != n) throw InvalidInput("kmeans_pp_init: weight count mismatch");
    if (m == 0) throw InvalidInput("kmeans_pp_init: m must be at least 1");
    require_finite(points, "kmeans_pp_init");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw InvalidInput("kmeans_pp_init: weights must be finite and nonnegative");
        total += w;
    }
    if (!(total > 0.0)) throw InvalidInput("kmeans_pp_init: weights sum to zero");
    if (count_distinct_points(points, weights) < m)
        throw InvalidInput("kmeans_pp_init: m exceeds the number of distinct points");

    Rng rng(seed);
    Matrix centroids(static_cast<Eigen::Index>(m), points.cols());
    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
    std::vector<double> score(weights.begin(), weights.end());

    for (std::size_t c = 0; c < m; ++c) {
        const std::size_t pick = rng.weighted_index(score);
        centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pick));
        for (std::size_t i = 0; i < n; ++i) {
            const double d2 = (points.row(static_cast<Eigen::Index>(i)) -
                               centroids.row(static_cast<Eigen::Index>(c)))
                                  .squaredNorm();
            min_dist[i] = std::min(min_dist[i], d2);
            score[i] = weights[i] * min_dist[i];
        }
    }
    return centroids;
}

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidInput("median: empty input");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidInput("least_squares_slope: need two or more paired values");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0)) throw InvalidInput("least_squares_slope: x values are all equal");
    return sxy / sxx;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t label) {
    auto splitmix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return splitmix(splitmix(base) ^ label);
}

}  // namespace specdyn
