#pragma once

#include "subphase/liftrec.hpp"

#include <optional>
#include <vector>

namespace subphase {

/// Dual certificate Y = (d/(nk)) sum_j lambda_j P_{V_j} with
/// lambda_j = alpha - d ||P_{V_j} x||^2 1_{E_j}, truncation events
/// E_j = { sqrt(d/k) ||P_{V_j} x|| <= 2 beta_gamma } and
/// alpha = (d^2/k) E(||P_V x||^4 1_E). The report carries the tangent-space
/// nuclear norm, the spectrum of Y restricted to the orthogonal complement
/// T_perp, and the best-fit multiple of the identity on T_perp.
struct CertificateReport {
    SymMat certificate = SymMat::zero(1);
    Vector lambda;
    std::vector<std::uint8_t> truncated;  // 1 when E_j failed (value was cut)
    double alpha = 0.0;
    double beta_gamma = 0.0;
    double tangent_nuclear = 0.0;    // ||Y_T||_1
    double normal_min_eig = 0.0;     // lambda_min of Y restricted to T_perp
    double normal_max_eig = 0.0;
    double delta_best = 0.0;         // argmin_delta ||Y_Tperp - delta I_Tperp||_inf
    double delta_gap = 0.0;          // the attained min

    /// Condition (c) of the uniqueness theorem for a given gamma.
    bool condition_c_holds(double gamma) const {
        return tangent_nuclear <= gamma && normal_min_eig >= 1.0;
    }
};

struct CertificateOptions {
    /// When set, alpha is re-estimated from this many fresh uniform subspaces
    /// instead of the system's own sample.
    std::optional<Index> independent_alpha_samples;
    Rng* rng = nullptr;  // required for the independent mode
};

/// Orthonormal basis of the hyperplane x^perp, as the last d-1 columns of a
/// Householder reflector mapping e_1 to x.
inline Matrix orthogonal_complement_basis(const Vector& x) {
    const Index d = x.size();
    Matrix h = Matrix::Identity(d, d);
    Vector v = x;
    v(0) -= (x(0) >= 0.0 ? -1.0 : 1.0);  // v = x - sign * e_1 with sign = -sign(x_0)
    const double vnorm2 = v.squaredNorm();
    if (vnorm2 > 1e-24) h -= (2.0 / vnorm2) * (v * v.transpose());
    // First column of h is now +-x; the rest spans the complement.
    return h.rightCols(d - 1);
}

inline CertificateReport build_certificate(const std::vector<Subspace>& subspaces, const Vector& x,
                                           double beta_gamma,
                                           const CertificateOptions& opts = {}) {
    if (subspaces.empty())
        throw std::invalid_argument("build_certificate: empty system");
    const Index d = subspaces.front().ambient_dim();
    const Index k = subspaces.front().sub_dim();
    if (x.size() != d) throw std::invalid_argument("build_certificate: dimension mismatch");
    if (std::abs(x.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("build_certificate: x must be a unit vector");
    if (beta_gamma < 0.5)
        throw std::invalid_argument("build_certificate: beta_gamma must be >= 1/2");

    const Index n = static_cast<Index>(subspaces.size());
    const double dd = static_cast<double>(d);
    const double kk = static_cast<double>(k);
    const double cutoff_sq = 4.0 * beta_gamma * beta_gamma * kk / dd;  // E_j: t_j <= 4 b^2 k/d

    Vector t(n);
    std::vector<std::uint8_t> truncated(static_cast<std::size_t>(n), 0);
    for (Index j = 0; j < n; ++j) {
        t(j) = subspaces[static_cast<std::size_t>(j)].projection_sq_norm(x);
        if (t(j) > cutoff_sq) truncated[static_cast<std::size_t>(j)] = 1;
    }

    double alpha;
    if (opts.independent_alpha_samples) {
        if (opts.rng == nullptr)
            throw std::invalid_argument("build_certificate: independent alpha mode needs an rng");
        const Index m = *opts.independent_alpha_samples;
        double acc = 0.0;
        for (Index i = 0; i < m; ++i) {
            const double ti = Subspace::sample_uniform(d, k, *opts.rng).projection_sq_norm(x);
            if (ti <= cutoff_sq) acc += ti * ti;
        }
        alpha = dd * dd / kk * acc / static_cast<double>(m);
    } else {
        double acc = 0.0;
        for (Index j = 0; j < n; ++j)
            if (!truncated[static_cast<std::size_t>(j)]) acc += t(j) * t(j);
        alpha = dd * dd / kk * acc / static_cast<double>(n);
    }

    Vector lambda(n);
    for (Index j = 0; j < n; ++j)
        lambda(j) = alpha - (truncated[static_cast<std::size_t>(j)] ? 0.0 : dd * t(j));

    // Y = (d/(nk)) sum_j lambda_j P_j, accumulated in the k-frames.
    Matrix acc = Matrix::Zero(d, d);
    for (Index j = 0; j < n; ++j)
        acc.selfadjointView<Eigen::Lower>().rankUpdate(subspaces[static_cast<std::size_t>(j)].basis(),
                                                       lambda(j));
    acc *= dd / (static_cast<double>(n) * kk);
    SymMat y = SymMat::from_lower(std::move(acc));

    CertificateReport report;
    report.lambda = std::move(lambda);
    report.truncated = std::move(truncated);
    report.alpha = alpha;
    report.beta_gamma = beta_gamma;

    const TangentSplit split = tangent_project(y, x);
    report.tangent_nuclear = norms(split.tangent).nuclear;

    const Matrix w = orthogonal_complement_basis(x);
    const SymMat restricted = SymMat::symmetrized(w.transpose() * y.mat() * w);
    const Vector spectrum = eigendecompose(restricted).eigenvalues;
    report.normal_max_eig = spectrum(0);
    report.normal_min_eig = spectrum(spectrum.size() - 1);
    report.delta_best = 0.5 * (report.normal_max_eig + report.normal_min_eig);
    report.delta_gap = 0.5 * (report.normal_max_eig - report.normal_min_eig);
    report.certificate = std::move(y);
    return report;
}

/// Empirical check of condition (a): max over random PSD matrices of
/// (1/n) ||F_n(X)||_1 / ||X||_1, compared against a supplied constant B.
struct ConditionReport {
    double worst_ratio = 0.0;  // max ratio for (a), min ratio for (b)
    double bound = 0.0;
    bool holds = false;
    int trials = 0;
};

inline ConditionReport check_condition_a(const MeasurementOperator& op, int trials, double bound,
                                         Rng& rng) {
    if (trials < 1) throw std::invalid_argument("check_condition_a: need trials >= 1");
    const Index d = op.ambient_dim();
    const double n = static_cast<double>(op.size());
    ConditionReport report;
    report.bound = bound;
    report.trials = trials;
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const Index rank = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(d));
        const Matrix g = gaussian_matrix(d, rank, rng);
        Matrix psd = Matrix::Zero(d, d);
        psd.selfadjointView<Eigen::Lower>().rankUpdate(g);
        const SymMat x = SymMat::from_lower(std::move(psd));
        const double nuclear = x.trace();  // = ||X||_1 for PSD X
        if (nuclear <= 0.0) continue;
        const double ratio = op.forward(x).lpNorm<1>() / n / nuclear;
        if (ratio > worst) worst = ratio;
    }
    report.worst_ratio = worst;
    report.holds = worst <= bound;
    return report;
}

/// Empirical check of condition (b) on the tangent space: every normalized
/// X in T has the form P_{z1} - t P_{z2} with z1 perp z2 and t in [-1, 1];
/// scans random such pairs (z1 drawn from span{x, random}) against a t-grid
/// and reports the minimum of (1/n) ||F_n(X)||_1 / ||X||_inf.
inline ConditionReport check_condition_b(const MeasurementOperator& op, const Vector& x,
                                         int trials, double bound, Rng& rng,
                                         int t_grid_points = 21) {
    if (trials < 1) throw std::invalid_argument("check_condition_b: need trials >= 1");
    const Index d = op.ambient_dim();
    if (x.size() != d) throw std::invalid_argument("check_condition_b: dimension mismatch");
    const double n = static_cast<double>(op.size());

    ConditionReport report;
    report.bound = bound;
    report.trials = trials;
    double worst = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < trials; ++trial) {
        // z1 in span{x, g} (unit), z2 a unit vector orthogonal to z1.
        Vector z1 = x * standard_normal(rng) + random_unit_vector(d, rng) * standard_normal(rng);
        if (z1.norm() < 1e-12) continue;
        z1.normalize();
        Vector z2 = random_unit_vector(d, rng);
        z2 -= z1 * z1.dot(z2);
        if (z2.norm() < 1e-12) continue;
        z2.normalize();

        const Vector f1 = op.forward_rank_one(z1);
        const Vector f2 = op.forward_rank_one(z2);
        for (int gi = 0; gi < t_grid_points; ++gi) {
            const double t = -1.0 + 2.0 * static_cast<double>(gi) /
                                        static_cast<double>(t_grid_points - 1);
            // ||P_{z1} - t P_{z2}||_inf = max(1, |t|) = 1 on the grid
            const double ratio = (f1 - t * f2).lpNorm<1>() / n;
            if (ratio < worst) worst = ratio;
        }
    }
    report.worst_ratio = worst;
    report.holds = worst >= bound;
    return report;
}

/// Monte-Carlo estimate of u_k = min over t in [-1, 1] of
/// (d/k) E |  ||P_V z1||^2 - t ||P_V z2||^2 |  for orthonormal z1, z2 (taken
/// canonical by rotation invariance). The Gaussian-limit mode replaces the
/// projections by a k x 2 standard normal matrix, the d -> infinity law.
struct UkEstimate {
    double u_hat = 0.0;
    double argmin_t = 0.0;
    double standard_error = 0.0;  // at the minimizing t
    double lower_confidence = 0.0;  // u_hat - 3 SE
    Vector scan_t;
    Vector scan_value;
};

inline UkEstimate estimate_uk(Index d, Index k, Index samples, int t_grid_points, Rng& rng,
                              bool gaussian_limit = false) {
    if (samples < 1000) throw std::invalid_argument("estimate_uk: need samples >= 1000");
    if (t_grid_points < 2) throw std::invalid_argument("estimate_uk: need at least 2 grid points");
    if (!gaussian_limit && (k < 1 || k > d || d < 2))
        throw std::invalid_argument("estimate_uk: need 1 <= k <= d, d >= 2");

    const double kk = static_cast<double>(k);
    Vector grid(t_grid_points);
    for (int gi = 0; gi < t_grid_points; ++gi)
        grid(gi) = -1.0 + 2.0 * static_cast<double>(gi) / static_cast<double>(t_grid_points - 1);

    Vector sum = Vector::Zero(t_grid_points);
    Vector sum_sq = Vector::Zero(t_grid_points);
    for (Index s = 0; s < samples; ++s) {
        double a, b;
        if (gaussian_limit) {
            const Matrix nmat = gaussian_matrix(k, 2, rng);
            a = nmat.col(0).squaredNorm() / kk;
            b = nmat.col(1).squaredNorm() / kk;
        } else {
            const Subspace v = Subspace::sample_uniform(d, k, rng);
            const double scale = static_cast<double>(d) / kk;
            a = scale * v.basis().row(0).squaredNorm();  // ||P_V e_1||^2 = ||Q^T e_1||^2
            b = scale * v.basis().row(1).squaredNorm();
        }
        for (int gi = 0; gi < t_grid_points; ++gi) {
            const double val = std::abs(a - grid(gi) * b);
            sum(gi) += val;
            sum_sq(gi) += val * val;
        }
    }

    UkEstimate est;
    est.scan_t = grid;
    est.scan_value = sum / static_cast<double>(samples);
    int argmin = 0;
    for (int gi = 1; gi < t_grid_points; ++gi)
        if (est.scan_value(gi) < est.scan_value(argmin)) argmin = gi;
    est.u_hat = est.scan_value(argmin);
    est.argmin_t = grid(argmin);
    const double mean = est.u_hat;
    const double var =
        std::max(0.0, sum_sq(argmin) / static_cast<double>(samples) - mean * mean);
    est.standard_error = std::sqrt(var / static_cast<double>(samples));
    est.lower_confidence = est.u_hat - 3.0 * est.standard_error;
    return est;
}

} // namespace subphase
