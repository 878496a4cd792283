#pragma once

#include "subphase/grassmann.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace subphase {

/// Weighted subspace system {(V_j, w_j)} with all subspaces sharing (d, k)
/// and strictly positive weights. `normalized` means the weights sum to one
/// within 1e-12; cubature verification and the closed-form reconstruction
/// require it.
class SubspaceSystem {
public:
    SubspaceSystem(std::vector<Subspace> subspaces, Vector weights)
        : subspaces_(std::move(subspaces)), weights_(std::move(weights)) {
        if (subspaces_.empty())
            throw std::invalid_argument("SubspaceSystem: need at least one subspace");
        if (weights_.size() != static_cast<Index>(subspaces_.size()))
            throw std::invalid_argument("SubspaceSystem: weight count mismatch");
        const Index d = subspaces_.front().ambient_dim();
        const Index k = subspaces_.front().sub_dim();
        for (const Subspace& v : subspaces_)
            if (v.ambient_dim() != d || v.sub_dim() != k)
                throw std::invalid_argument("SubspaceSystem: mixed (d, k) shapes");
        for (Index j = 0; j < weights_.size(); ++j)
            if (!(weights_(j) > 0.0))
                throw std::invalid_argument("SubspaceSystem: weights must be positive");
        normalized_ = std::abs(weights_.sum() - 1.0) <= 1e-12;
    }

    static SubspaceSystem equal_weights(std::vector<Subspace> subspaces) {
        const Index n = static_cast<Index>(subspaces.size());
        if (n == 0) throw std::invalid_argument("SubspaceSystem: need at least one subspace");
        return SubspaceSystem(std::move(subspaces), Vector::Constant(n, 1.0 / static_cast<double>(n)));
    }

    Index size() const { return static_cast<Index>(subspaces_.size()); }
    Index ambient_dim() const { return subspaces_.front().ambient_dim(); }
    Index sub_dim() const { return subspaces_.front().sub_dim(); }
    const Subspace& subspace(Index j) const { return subspaces_[static_cast<std::size_t>(j)]; }
    const std::vector<Subspace>& subspaces() const { return subspaces_; }
    double weight(Index j) const { return weights_(j); }
    const Vector& weights() const { return weights_; }
    double weight_sum() const { return weights_.sum(); }
    bool is_normalized() const { return normalized_; }

    /// Squared projection norms t_j(x) = ||P_{V_j} x||^2 for all j.
    Vector projection_sq_norms(const Vector& x) const {
        Vector t(size());
        for (Index j = 0; j < size(); ++j) t(j) = subspaces_[static_cast<std::size_t>(j)].projection_sq_norm(x);
        return t;
    }

private:
    std::vector<Subspace> subspaces_;
    Vector weights_;
    bool normalized_ = false;
};

/// Optimal fusion-frame constants of the system: the extreme eigenvalues of
/// S_1 = sum_j w_j P_{V_j}. A > 0 iff the subspaces span R^d.
struct FrameBounds {
    double lower;
    double upper;
};

inline FrameBounds frame_bounds(const SubspaceSystem& sys) {
    const Index d = sys.ambient_dim();
    Matrix s1 = Matrix::Zero(d, d);
    for (Index j = 0; j < sys.size(); ++j)
        s1.selfadjointView<Eigen::Lower>().rankUpdate(sys.subspace(j).basis(), sys.weight(j));
    const Vector lam = eigendecompose(SymMat::from_lower(std::move(s1))).eigenvalues;
    return FrameBounds{lam(lam.size() - 1), lam(0)};
}

/// Tight l-fusion frame constant A_l = (k/2)_l / (d/2)_l * sum_j w_j.
inline double tight_bound_formula(Index d, Index k, int l, double weight_sum) {
    if (k < 1 || k > d || l < 1)
        throw std::invalid_argument("tight_bound_formula: need 1 <= k <= d and l >= 1");
    return projection_moment(d, k, l) * weight_sum;
}

/// Probe-based tightness check: evaluates g_l(x) = sum_j w_j <P_x, P_{V_j}>^l
/// at all canonical basis vectors plus random unit probes and records the
/// worst deviation from A_l, for every l <= p. A "tight" verdict is evidence,
/// not a certificate.
struct TightnessReport {
    int p = 0;
    double tol = 0.0;
    std::vector<double> bound;          // A_l for l = 1..p
    std::vector<double> max_deviation;  // max_x |g_l(x) - A_l|
    bool tight = false;
};

inline TightnessReport verify_p_fusion_tight(const SubspaceSystem& sys, int p, int num_probes,
                                             double tol, Rng& rng) {
    if (p < 1) throw std::invalid_argument("verify_p_fusion_tight: need p >= 1");
    const Index d = sys.ambient_dim();
    const Index k = sys.sub_dim();

    TightnessReport report;
    report.p = p;
    report.tol = tol;
    report.bound.resize(static_cast<std::size_t>(p));
    report.max_deviation.assign(static_cast<std::size_t>(p), 0.0);
    for (int l = 1; l <= p; ++l)
        report.bound[static_cast<std::size_t>(l - 1)] = tight_bound_formula(d, k, l, sys.weight_sum());

    std::vector<Vector> probes;
    probes.reserve(static_cast<std::size_t>(d + num_probes));
    for (Index i = 0; i < d; ++i) probes.push_back(Vector::Unit(d, i));
    for (int i = 0; i < num_probes; ++i) probes.push_back(random_unit_vector(d, rng));

    for (const Vector& x : probes) {
        const Vector t = sys.projection_sq_norms(x);
        for (int l = 1; l <= p; ++l) {
            double g = 0.0;
            for (Index j = 0; j < sys.size(); ++j)
                g += sys.weight(j) * std::pow(t(j), l);
            const double dev = std::abs(g - report.bound[static_cast<std::size_t>(l - 1)]);
            double& worst = report.max_deviation[static_cast<std::size_t>(l - 1)];
            if (dev > worst) worst = dev;
        }
    }
    report.tight = true;
    for (double dev : report.max_deviation)
        if (dev > tol) report.tight = false;
    return report;
}

/// Strength-4 cubature verdict via the reconstruction identity
///   X = a1 sum_j w_j <X, P_{V_j}> P_{V_j} - a2 trace(X) I,
/// tested on all d(d+1)/2 canonical symmetric basis matrices. The identity on
/// a basis of the symmetric matrices is equivalent to the strength-4 moment
/// conditions, so this check is deterministic and exact up to roundoff.
struct CubatureCheck {
    bool is_cubature = false;
    double max_deviation = 0.0;
    double tol = 0.0;
};

inline constexpr double kVerifierDefaultTol = 1e-8;

inline CubatureCheck verify_cubature4(const SubspaceSystem& sys, double tol = kVerifierDefaultTol) {
    const Index d = sys.ambient_dim();
    const Index k = sys.sub_dim();
    if (k == d)
        throw std::invalid_argument("verify_cubature4: constants are undefined for k = d");
    if (!sys.is_normalized())
        throw std::invalid_argument("verify_cubature4: weights must sum to one");

    const double dd = static_cast<double>(d);
    const double kk = static_cast<double>(k);
    const double a1 = dd * (dd + 2.0) * (dd - 1.0) / (2.0 * kk * (dd - kk));
    const double a2 = (kk * dd + kk - 2.0) / (2.0 * (dd - kk));

    // One image accumulator per basis element; a single pass over the system
    // fills all of them.
    const Index nbasis = d * (d + 1) / 2;
    std::vector<Matrix> images(static_cast<std::size_t>(nbasis), Matrix::Zero(d, d));

    for (Index j = 0; j < sys.size(); ++j) {
        const SymMat pj = sys.subspace(j).projector();
        const double wj = sys.weight(j);
        Index b = 0;
        for (Index col = 0; col < d; ++col) {
            for (Index row = col; row < d; ++row, ++b) {
                // <E_b, P_j>: diagonal elements E_ii, off-diagonal (E_ij + E_ji)/sqrt(2)
                const double inner = (row == col) ? pj(row, col) : M_SQRT2 * pj(row, col);
                images[static_cast<std::size_t>(b)] += (a1 * wj * inner) * pj.mat();
            }
        }
    }

    CubatureCheck check;
    check.tol = tol;
    Index b = 0;
    for (Index col = 0; col < d; ++col) {
        for (Index row = col; row < d; ++row, ++b) {
            Matrix expected = Matrix::Zero(d, d);
            double tr = 0.0;
            if (row == col) {
                expected(row, col) = 1.0;
                tr = 1.0;
            } else {
                expected(row, col) = M_SQRT1_2;
                expected(col, row) = M_SQRT1_2;
            }
            Matrix image = images[static_cast<std::size_t>(b)];
            image.diagonal().array() -= a2 * tr;
            const double dev = (image - expected).norm();
            if (dev > check.max_deviation) check.max_deviation = dev;
        }
    }
    check.is_cubature = check.max_deviation <= tol;
    return check;
}

/// Aggregate report used by the CLI `verify` command.
struct FrameReport {
    FrameBounds bounds{0.0, 0.0};
    double tightness_ratio = 0.0;  // upper / lower
    TightnessReport tightness;
    CubatureCheck cubature;        // meaningful only when the system is normalized and k < d
    bool cubature_checked = false;
};

inline FrameReport frame_report(const SubspaceSystem& sys, int p_max, int num_probes, double tol,
                                Rng& rng) {
    FrameReport report;
    report.bounds = frame_bounds(sys);
    report.tightness_ratio =
        report.bounds.lower > 0.0 ? report.bounds.upper / report.bounds.lower
                                  : std::numeric_limits<double>::infinity();
    report.tightness = verify_p_fusion_tight(sys, p_max, num_probes, tol, rng);
    if (sys.is_normalized() && sys.sub_dim() < sys.ambient_dim()) {
        report.cubature = verify_cubature4(sys, tol);
        report.cubature_checked = true;
    }
    return report;
}

/// Reference fixture: n equally spaced lines in R^2 (angles j*pi/n) with
/// equal weights. For n >= 3 this is a strength-4 cubature for G_{1,2}; the
/// repository ships the n = 5 and n = 6 instances as JSON fixtures and the
/// verifier confirms them.
inline SubspaceSystem equiangular_line_system(int n_lines) {
    if (n_lines < 1) throw std::invalid_argument("equiangular_line_system: need n >= 1");
    std::vector<Subspace> lines;
    lines.reserve(static_cast<std::size_t>(n_lines));
    for (int j = 0; j < n_lines; ++j) {
        const double angle = M_PI * static_cast<double>(j) / static_cast<double>(n_lines);
        Matrix basis(2, 1);
        basis(0, 0) = std::cos(angle);
        basis(1, 0) = std::sin(angle);
        lines.emplace_back(std::move(basis));
    }
    return SubspaceSystem::equal_weights(std::move(lines));
}

} // namespace subphase
