#pragma once

#include "subphase/frames.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace subphase {

/// Constants of the closed-form reconstruction on a strength-4 cubature:
///   a1 = d(d+2)(d-1) / (2k(d-k)),  a2 = (kd+k-2) / (2(d-k)).
/// Both are positive for 1 <= k < d, d >= 2. Defined only for k < d.
struct CubatureConstants {
    Index d = 0;
    Index k = 0;
    double a1 = 0.0;
    double a2 = 0.0;
};

inline CubatureConstants cubature_constants(Index d, Index k) {
    if (k < 1 || k >= d)
        throw std::invalid_argument("cubature_constants: need 1 <= k < d");
    const double dd = static_cast<double>(d);
    const double kk = static_cast<double>(k);
    CubatureConstants c;
    c.d = d;
    c.k = k;
    c.a1 = dd * (dd + 2.0) * (dd - 1.0) / (2.0 * kk * (dd - kk));
    c.a2 = (kk * dd + kk - 2.0) / (2.0 * (dd - kk));
    return c;
}

/// Squared projection norms t_j = ||P_{V_j} x||^2 with a per-entry observed
/// mask. Complete data has an all-true mask; the erasure decoder consumes
/// masked instances (erasure positions are known, only values are lost).
struct Measurements {
    Vector values;
    std::vector<std::uint8_t> mask;  // 1 = observed

    static Measurements complete(Vector values) {
        Measurements m;
        m.mask.assign(static_cast<std::size_t>(values.size()), 1);
        m.values = std::move(values);
        return m;
    }

    Index size() const { return values.size(); }

    Index erased_count() const {
        Index c = 0;
        for (std::uint8_t o : mask)
            if (!o) ++c;
        return c;
    }

    bool all_observed() const { return erased_count() == 0; }

    bool observed(Index j) const { return mask[static_cast<std::size_t>(j)] != 0; }
};

/// Forward model: measures the squared projection norms of x on every
/// subspace of the system.
inline Measurements measure(const SubspaceSystem& sys, const Vector& x) {
    return Measurements::complete(sys.projection_sq_norms(x));
}

/// Erases the given positions (values zeroed, mask cleared).
inline Measurements erase(Measurements m, const std::vector<Index>& positions) {
    for (Index j : positions) {
        if (j < 0 || j >= m.size())
            throw std::invalid_argument("erase: position out of range");
        m.mask[static_cast<std::size_t>(j)] = 0;
        m.values(j) = 0.0;
    }
    return m;
}

/// Closed-form reconstruction of X = x x^T from complete magnitude data on a
/// strength-4 cubature:
///   X = a1 sum_j w_j t_j P_{V_j} - a2 * tau * I,  tau = (d/k) sum_j w_j t_j.
/// The system is assumed verified (the CLI wires verification in by default;
/// the library call does not re-check the cubature property).
inline SymMat reconstruct_rank_one(const SubspaceSystem& sys, const Measurements& m) {
    if (!sys.is_normalized())
        throw std::invalid_argument("reconstruct_rank_one: weights must sum to one");
    if (m.size() != sys.size())
        throw std::invalid_argument("reconstruct_rank_one: measurement count mismatch");
    if (!m.all_observed())
        throw std::invalid_argument(
            "reconstruct_rank_one: erased entries present; use the erasure decoder");

    const Index d = sys.ambient_dim();
    const CubatureConstants c = cubature_constants(d, sys.sub_dim());

    Matrix acc = Matrix::Zero(d, d);
    double weighted_sum = 0.0;
    for (Index j = 0; j < sys.size(); ++j) {
        const double coeff = sys.weight(j) * m.values(j);
        acc.selfadjointView<Eigen::Lower>().rankUpdate(sys.subspace(j).basis(), coeff);
        weighted_sum += coeff;
    }
    const double tau = static_cast<double>(d) / static_cast<double>(sys.sub_dim()) * weighted_sum;
    acc *= c.a1;
    acc.diagonal().array() -= c.a2 * tau;
    return SymMat::from_lower(std::move(acc));
}

/// Rank-one extraction from a recovered matrix: the top eigenpair gives
/// xhat = sqrt(max(lambda_1, 0)) q_1 with the sign fixed so the first
/// coordinate with |entry| > 1e-12 is positive. `ambiguous` flags a
/// non-positive or poorly separated top eigenvalue.
struct SignalEstimate {
    Vector signal;
    double scale = 0.0;           // top eigenvalue, clipped at zero
    double rank1_residual = 1.0;  // ||X - xhat xhat^T||_F / max(||X||_F, eps)
    bool ambiguous = false;
};

inline SignalEstimate extract_signal(const SymMat& x) {
    const EigenDecomp ed = eigendecompose(x);
    const Index d = x.dim();
    const double lam1 = ed.eigenvalues(0);

    SignalEstimate est;
    if (!(lam1 > 0.0)) {
        est.signal = Vector::Zero(d);
        est.scale = 0.0;
        est.rank1_residual = 1.0;
        est.ambiguous = true;
        return est;
    }

    Vector q = ed.eigenvectors.col(0);
    for (Index i = 0; i < d; ++i) {
        if (std::abs(q(i)) > 1e-12) {
            if (q(i) < 0.0) q = -q;
            break;
        }
    }
    est.signal = std::sqrt(lam1) * q;
    est.scale = lam1;
    const double denom = std::max(x.frobenius_norm(), std::numeric_limits<double>::min());
    est.rank1_residual = (x - SymMat::outer(est.signal)).frobenius_norm() / denom;
    const double lam2 = d > 1 ? std::max(ed.eigenvalues(1), 0.0) : 0.0;
    est.ambiguous = lam2 > 0.5 * lam1;
    return est;
}

/// Error up to the global sign ambiguity: min(||a - b||, ||a + b||).
inline double signed_distance(const Vector& a, const Vector& b) {
    return std::min((a - b).norm(), (a + b).norm());
}

/// Law-of-large-numbers estimator from i.i.d. uniform subspaces:
///   (a1/n) sum_j t_j P_{V_j} - a2 * tau * I,  tau = (d/(k n)) sum_j t_j.
/// Unbiased for x x^T under the invariant measure.
inline SymMat monte_carlo_reconstruct(const std::vector<Subspace>& subspaces, const Vector& t) {
    if (subspaces.empty())
        throw std::invalid_argument("monte_carlo_reconstruct: empty sample list");
    if (t.size() != static_cast<Index>(subspaces.size()))
        throw std::invalid_argument("monte_carlo_reconstruct: value count mismatch");
    const Index d = subspaces.front().ambient_dim();
    const Index k = subspaces.front().sub_dim();
    for (const Subspace& v : subspaces)
        if (v.ambient_dim() != d || v.sub_dim() != k)
            throw std::invalid_argument("monte_carlo_reconstruct: mixed (d, k) shapes");
    const CubatureConstants c = cubature_constants(d, k);
    const double n = static_cast<double>(subspaces.size());

    Matrix acc = Matrix::Zero(d, d);
    for (std::size_t j = 0; j < subspaces.size(); ++j)
        acc.selfadjointView<Eigen::Lower>().rankUpdate(subspaces[j].basis(),
                                                       t(static_cast<Index>(j)));
    const double tau = static_cast<double>(d) / (static_cast<double>(k) * n) * t.sum();
    acc *= c.a1 / n;
    acc.diagonal().array() -= c.a2 * tau;
    return SymMat::from_lower(std::move(acc));
}

} // namespace subphase
