#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include "omr/matrix.hpp"

namespace omr {

/// splitmix64 mixer; used for deriving independent seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
    return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

/// Seedable deterministic random stream.
///
/// Engine: std::mt19937_64 (bit-identical for identical seed on every
/// platform). Uniforms take the top 53 bits of one engine draw; Gaussians
/// use the trigonometric Box-Muller transform on consecutive uniforms,
/// with the second variate of each pair cached.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal N(0, 1) draw.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// n x d matrix of i.i.d. standard Gaussian entries, filled row by row.
inline Mat random_gaussian(int n, int d, Rng& rng) {
    if (n < 1 || d < 1)
        throw std::invalid_argument("random_gaussian: dimensions must be >= 1");
    Mat m(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            m(i, j) = rng.normal();
    return m;
}

/// Haar-distributed d x d orthogonal matrix: QR of a Gaussian matrix with
/// the sign convention that R has positive diagonal.
inline Mat random_orthogonal(int d, Rng& rng) {
    if (d < 1)
        throw std::invalid_argument("random_orthogonal: dimension must be >= 1");
    const Mat g = random_gaussian(d, d, rng);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

}  // namespace omr
