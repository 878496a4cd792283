#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace subphase {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when a numerical routine (eigensolver, root finder, ...) fails to
/// produce a usable result.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a requested configuration is outside the supported scope
/// (e.g. unequal-weight power-sum systems beyond the implemented order).
class UnsupportedError : public std::runtime_error {
public:
    explicit UnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Random streams
//
// Every stochastic routine takes an explicit engine so that experiments are
// replayable: a trial is identified by a single 64-bit seed, and per-trial
// seeds are derived from a master seed with splitmix64 (stream index mixing
// keeps trials independent and order-free under parallel execution).
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and up to two
/// stream indices (e.g. sweep cell and trial number).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64_next(s);
    s = h ^ (a + 0x9e3779b97f4a7c15ULL);
    h = splitmix64_next(s);
    s = h ^ (b + 0xbf58476d1ce4e5b9ULL);
    return splitmix64_next(s);
}

/// Uniform draw in (0, 1]; never returns zero so it is log-safe.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal via Box-Muller. Implemented by hand instead of
/// std::normal_distribution so sequences depend only on the engine state,
/// not on the standard library build.
inline double standard_normal(Rng& rng) {
    const double u1 = uniform_unit(rng);
    const double u2 = uniform_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline Vector gaussian_vector(Index n, Rng& rng) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = standard_normal(rng);
    return v;
}

inline Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
    Matrix m(rows, cols);
    // column-major fill to match storage order
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = standard_normal(rng);
    return m;
}

/// Uniform point on the sphere S^{d-1}.
inline Vector random_unit_vector(Index d, Rng& rng) {
    while (true) {
        Vector v = gaussian_vector(d, rng);
        const double n = v.norm();
        if (n > 1e-12) return v / n;
    }
}

/// Rising factorial (a)_l = a (a+1) ... (a+l-1), with (a)_0 = 1.
inline double pochhammer(double a, int l) {
    double prod = 1.0;
    for (int i = 0; i < l; ++i) prod *= (a + i);
    return prod;
}

} // namespace subphase
