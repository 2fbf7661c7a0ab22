#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace specdyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Seeded random source. Doubles are built from raw 64-bit draws and normals
/// by Box-Muller, so the streams do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal.
    double normal();

    /// Index drawn with probability proportional to `weights` (not all zero).
    std::size_t weighted_index(std::span<const double> weights);

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

/// 64-bit FNV-1a digest over numeric content; used to tag feature maps and
/// models so mismatched combinations can be rejected.
class Fingerprint {
public:
    Fingerprint& add(std::string_view text);
    Fingerprint& add(std::uint64_t value);
    Fingerprint& add(double value);
    Fingerprint& add(const Matrix& values);
    Fingerprint& add(const Vector& values);

    std::string hex() const;

private:
    void mix(const unsigned char* data, std::size_t len);
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

/// Throws InvalidInput naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& a, std::string_view what);
void require_finite(const Vector& a, std::string_view what);

/// Thin singular value decomposition A = U diag(s) V^T.
///
/// Singular values are nonincreasing; each column of U is signed so that its
/// largest-magnitude entry is positive (the matching V column is flipped with it).
struct SvdResult {
    Matrix u;
    Vector singular_values;
    Matrix v;

    Matrix reconstruct() const;
    /// Rank-r truncation U_{:r} diag(s_{:r}) V_{:r}^T.
    Matrix truncated(std::size_t r) const;
};

SvdResult thin_svd(const Matrix& a);

/// Largest singular value.
double spectral_norm(const Matrix& a);

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
struct SymEig {
    Vector eigenvalues;
    Matrix eigenvectors;  // column i pairs with eigenvalues(i)
};

SymEig sym_eig(const Matrix& a);

struct Assignment {
    std::vector<std::size_t> permutation;  // row i -> column permutation[i]
    double total_cost = 0.0;
};

/// Exact minimum-cost perfect matching on a square cost matrix (Hungarian method).
Assignment min_cost_permutation(const Matrix& cost);

/// Weighted k-means++ seeding: the first centroid is drawn proportionally to
/// weight, later ones proportionally to weight times squared distance to the
/// nearest chosen centroid. Returns an m x dim matrix of distinct points.
Matrix kmeans_pp_init(const Matrix& points, std::span<const double> weights, std::size_t m,
                      std::uint64_t seed);

/// Number of distinct rows among the points with positive weight.
std::size_t count_distinct_points(const Matrix& points, std::span<const double> weights);

/// Median (mean of the two middle values for even sizes); throws on empty input.
double median(std::vector<double> values);

/// Least-squares slope of y against x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

/// Derives an independent stream seed from a base seed and a label (splitmix64 mixing).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t label);

}  // namespace specdyn
