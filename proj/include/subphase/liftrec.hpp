#pragma once

#include "subphase/exact.hpp"

#include <chrono>
#include <utility>
#include <vector>

namespace subphase {

/// The lifted measurement operator of the random setting,
///   F_n : X -> (d/k) (<X, P_{V_j}>)_{j=1}^n,
/// with adjoint F_n^* : lambda -> (d/k) sum_j lambda_j P_{V_j}. The subspace
/// bases are stacked into one d x (n k) matrix so forward and adjoint are
/// single GEMMs, and the Gram matrix G_ij = (d/k)^2 <P_i, P_j> is factored
/// once (spectrally, which also yields its condition number; a ridge
/// 1e-10 trace(G)/n is added when cond(G) > 1e12).
class MeasurementOperator {
public:
    explicit MeasurementOperator(std::vector<Subspace> subspaces)
        : subspaces_(std::move(subspaces)) {
        if (subspaces_.empty())
            throw std::invalid_argument("MeasurementOperator: need at least one subspace");
        d_ = subspaces_.front().ambient_dim();
        k_ = subspaces_.front().sub_dim();
        n_ = static_cast<Index>(subspaces_.size());
        for (const Subspace& v : subspaces_)
            if (v.ambient_dim() != d_ || v.sub_dim() != k_)
                throw std::invalid_argument("MeasurementOperator: mixed (d, k) shapes");
        scale_ = static_cast<double>(d_) / static_cast<double>(k_);

        stacked_.resize(d_, n_ * k_);
        for (Index j = 0; j < n_; ++j)
            stacked_.middleCols(j * k_, k_) = subspaces_[static_cast<std::size_t>(j)].basis();

        // G_ij = scale^2 ||Q_i^T Q_j||_F^2, assembled blockwise over the upper
        // triangle to keep the working set at O(n k^2).
        gram_.resize(n_, n_);
        for (Index i = 0; i < n_; ++i) {
            const Matrix cross = stacked_.middleCols(i * k_, k_).transpose() *
                                 stacked_.rightCols((n_ - i) * k_);
            for (Index j = i; j < n_; ++j) {
                const double g =
                    scale_ * scale_ * cross.middleCols((j - i) * k_, k_).squaredNorm();
                gram_(i, j) = g;
                gram_(j, i) = g;
            }
        }

        Eigen::SelfAdjointEigenSolver<Matrix> solver(gram_);
        if (solver.info() != Eigen::Success)
            throw NumericalError("MeasurementOperator: Gram eigendecomposition failed");
        gram_eigvals_ = solver.eigenvalues();
        gram_eigvecs_ = solver.eigenvectors();
        const double lam_max = gram_eigvals_.maxCoeff();
        const double lam_min = gram_eigvals_.minCoeff();
        gram_condition_ = lam_min > 0.0 ? lam_max / lam_min : std::numeric_limits<double>::infinity();
        regularized_ = gram_condition_ > 1e12;
        const double ridge =
            regularized_ ? 1e-10 * gram_.trace() / static_cast<double>(n_) : 0.0;
        gram_inv_scale_ = (gram_eigvals_.array().max(0.0) + ridge).inverse();
        gram_shift_inv_scale_ = (gram_eigvals_.array().max(0.0) + 1.0).inverse();
    }

    Index size() const { return n_; }
    Index ambient_dim() const { return d_; }
    Index sub_dim() const { return k_; }
    double scale() const { return scale_; }
    const std::vector<Subspace>& subspaces() const { return subspaces_; }
    const Matrix& gram() const { return gram_; }
    double gram_condition() const { return gram_condition_; }
    bool regularized() const { return regularized_; }

    Vector forward(const SymMat& x) const {
        const Matrix prod = stacked_.cwiseProduct(x.mat() * stacked_);
        const Eigen::RowVectorXd colsums = prod.colwise().sum();
        Vector f(n_);
        for (Index j = 0; j < n_; ++j) f(j) = scale_ * colsums.segment(j * k_, k_).sum();
        return f;
    }

    /// f = F_n(x x^T) without lifting: entry j is scale * ||Q_j^T x||^2.
    Vector forward_rank_one(const Vector& x) const {
        Vector f(n_);
        for (Index j = 0; j < n_; ++j)
            f(j) = scale_ * subspaces_[static_cast<std::size_t>(j)].projection_sq_norm(x);
        return f;
    }

    SymMat adjoint(const Vector& lambda) const {
        if (lambda.size() != n_)
            throw std::invalid_argument("MeasurementOperator::adjoint: length mismatch");
        Vector expanded(n_ * k_);
        for (Index j = 0; j < n_; ++j) expanded.segment(j * k_, k_).setConstant(lambda(j));
        Matrix a = stacked_ * expanded.asDiagonal() * stacked_.transpose();
        a *= scale_;
        return SymMat::from_lower(std::move(a));
    }

    /// G^+ r through the stored spectral factorization.
    Vector gram_solve(const Vector& r) const {
        return gram_eigvecs_ *
               (gram_inv_scale_ * (gram_eigvecs_.transpose() * r).array()).matrix();
    }

    /// (I + G)^{-1} r, used by the l1 solver's Woodbury step.
    Vector gram_shift_solve(const Vector& r) const {
        return gram_eigvecs_ *
               (gram_shift_inv_scale_ * (gram_eigvecs_.transpose() * r).array()).matrix();
    }

    /// Orthogonal projection onto the affine set {X : F_n(X) = f}:
    /// X + F_n^*(G^+ (f - F_n(X))).
    SymMat affine_project(const SymMat& x, const Vector& f) const {
        const Vector residual = f - forward(x);
        return x + adjoint(gram_solve(residual));
    }

private:
    std::vector<Subspace> subspaces_;
    Index d_ = 0, k_ = 0, n_ = 0;
    double scale_ = 0.0;
    Matrix stacked_;  // d x (n k)
    Matrix gram_;
    Matrix gram_eigvecs_;
    Vector gram_eigvals_;
    Eigen::ArrayXd gram_inv_scale_;
    Eigen::ArrayXd gram_shift_inv_scale_;
    double gram_condition_ = 0.0;
    bool regularized_ = false;
};

enum class SolveStatus { converged, max_iters, infeasible };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_iters: return "max_iters";
        case SolveStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

struct SolverConfig {
    int max_iters = 5000;
    double tol = 1e-7;     // relative feasibility residual
    bool dykstra = true;   // feasibility solver: Dykstra correction on the cone
    double rho = 1.0;      // ADMM penalty (trace and l1 solvers)
};

struct SolverResult {
    SymMat x_hat = SymMat::zero(1);
    SignalEstimate estimate;
    SolveStatus status = SolveStatus::max_iters;
    double feasibility_l2 = 0.0;   // ||F_n(X) - f||_2
    double feasibility_l1 = 0.0;   // ||F_n(X) - f||_1
    double relative_residual = 0.0;
    double psd_violation = 0.0;    // max(0, -lambda_min(X))
    int iterations = 0;
    double wall_ms = 0.0;
};

namespace detail {

class WallTimer {
public:
    WallTimer() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline void finalize_result(SolverResult& result, const MeasurementOperator& op, const SymMat& x,
                            const Vector& f, int iterations, SolveStatus status,
                            const WallTimer& timer) {
    result.x_hat = x;
    result.estimate = extract_signal(x);
    result.status = status;
    const Vector residual = op.forward(x) - f;
    result.feasibility_l2 = residual.norm();
    result.feasibility_l1 = residual.lpNorm<1>();
    result.relative_residual = result.feasibility_l2 / std::max(1.0, f.norm());
    const Vector lam = eigendecompose(x).eigenvalues;
    result.psd_violation = std::max(0.0, -lam(lam.size() - 1));
    result.iterations = iterations;
    result.wall_ms = timer.elapsed_ms();
}

inline void require_magnitude_data(const Vector& f, double tol) {
    for (Index j = 0; j < f.size(); ++j)
        if (f(j) < -tol)
            throw std::invalid_argument("solver: measurement entries must be >= -tol");
}

} // namespace detail

/// Feasibility problem: find X >= 0 with F_n(X) = f, by alternating
/// projections between the affine set and the PSD cone. Dykstra's correction
/// (on by default) prevents stalls on thin cone sections. Returns the first
/// PSD iterate whose relative affine residual stays within tol for three
/// consecutive iterations.
inline SolverResult solve_feasibility(const MeasurementOperator& op, const Vector& f,
                                      const SolverConfig& cfg = {}) {
    if (f.size() != op.size())
        throw std::invalid_argument("solve_feasibility: measurement length mismatch");
    detail::require_magnitude_data(f, cfg.tol);
    const detail::WallTimer timer;
    const double fscale = std::max(1.0, f.norm());

    SolverResult result;

    // Start from the min-norm affine solution; if f is not in the range of
    // F_n (possible when n exceeds dim of the symmetric matrices, or under
    // noise), the affine set is empty and the problem is infeasible.
    const SymMat x_ls = op.adjoint(op.gram_solve(f));
    const double range_gap = (op.forward(x_ls) - f).norm() / fscale;
    if (range_gap > std::max(10.0 * cfg.tol, 1e-10)) {
        detail::finalize_result(result, op, psd_project(x_ls), f, 0, SolveStatus::infeasible,
                                timer);
        return result;
    }

    SymMat x = psd_project(x_ls);
    SymMat cone_correction = SymMat::zero(op.ambient_dim());

    SymMat best = x;
    double best_residual = std::numeric_limits<double>::infinity();
    int consecutive_ok = 0;

    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        // x is the current PSD iterate; one forward pass both scores it and
        // feeds the affine correction.
        const Vector residual = f - op.forward(x);
        const double rel = residual.norm() / fscale;
        if (rel < best_residual) {
            best_residual = rel;
            best = x;
        }
        consecutive_ok = rel <= cfg.tol ? consecutive_ok + 1 : 0;
        if (consecutive_ok >= 3) {
            detail::finalize_result(result, op, x, f, it, SolveStatus::converged, timer);
            return result;
        }

        const SymMat y = x + op.adjoint(op.gram_solve(residual));
        if (cfg.dykstra) {
            const SymMat w = y + cone_correction;
            x = psd_project(w);
            cone_correction = w - x;
        } else {
            x = psd_project(y);
        }
    }
    detail::finalize_result(result, op, best, f, it, SolveStatus::max_iters, timer);
    return result;
}

/// Trace minimization  min trace(X)  s.t.  F_n(X) = f, X >= 0,  by ADMM on
/// the splitting X = Z: the X-update is an affine projection of
/// Z - U - (1/rho) I, the Z-update a PSD projection, and U the running dual.
inline SolverResult solve_trace_min(const MeasurementOperator& op, const Vector& f,
                                    const SolverConfig& cfg = {}) {
    if (f.size() != op.size())
        throw std::invalid_argument("solve_trace_min: measurement length mismatch");
    detail::require_magnitude_data(f, cfg.tol);
    const detail::WallTimer timer;
    const double fscale = std::max(1.0, f.norm());
    const Index d = op.ambient_dim();

    SolverResult result;

    const SymMat x_ls = op.adjoint(op.gram_solve(f));
    const double range_gap = (op.forward(x_ls) - f).norm() / fscale;
    if (range_gap > std::max(10.0 * cfg.tol, 1e-10)) {
        detail::finalize_result(result, op, psd_project(x_ls), f, 0, SolveStatus::infeasible,
                                timer);
        return result;
    }

    SymMat z = psd_project(x_ls);
    SymMat u = SymMat::zero(d);
    const SymMat trace_step = SymMat::identity(d) * (1.0 / cfg.rho);

    SymMat best = z;
    double best_residual = std::numeric_limits<double>::infinity();
    int consecutive_ok = 0;

    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        const SymMat x = op.affine_project(z - u - trace_step, f);
        const SymMat z_next = psd_project(x + u);
        u += x - z_next;
        z = z_next;

        const double feas = (op.forward(z) - f).norm() / fscale;
        const double split = (x - z).frobenius_norm() / std::max(1.0, z.frobenius_norm());
        const double rel = std::max(feas, split);
        if (rel < best_residual) {
            best_residual = rel;
            best = z;
        }
        consecutive_ok = rel <= cfg.tol ? consecutive_ok + 1 : 0;
        if (consecutive_ok >= 3) {
            detail::finalize_result(result, op, z, f, it + 1, SolveStatus::converged, timer);
            return result;
        }
    }
    detail::finalize_result(result, op, best, f, it, SolveStatus::max_iters, timer);
    return result;
}

/// Robust recovery  min ||F_n(X) - f||_1  s.t.  X >= 0  by proximal ADMM on
/// the splitting y = F_n(X), Z = X. The y-update is the l1 proximal map
/// (soft threshold), the X-update solves (I + F_n^* F_n) X = B through the
/// Woodbury identity with the cached Gram factorization, and the best
/// objective PSD iterate is returned.
inline SolverResult solve_l1_robust(const MeasurementOperator& op, const Vector& f,
                                    const SolverConfig& cfg = {}) {
    if (f.size() != op.size())
        throw std::invalid_argument("solve_l1_robust: measurement length mismatch");
    const detail::WallTimer timer;
    const double fscale = std::max(1.0, f.norm());
    const Index d = op.ambient_dim();

    const auto soft_threshold = [](const Vector& v, double thresh) -> Vector {
        return v.array().sign() * (v.array().abs() - thresh).max(0.0);
    };
    // (I + F* F)^{-1} B = B - F*((I + G)^{-1} F(B))
    const auto ridge_solve = [&](const SymMat& b) {
        return b - op.adjoint(op.gram_shift_solve(op.forward(b)));
    };

    SymMat x = psd_project(op.adjoint(op.gram_solve(f)));
    Vector y = op.forward(x);
    SymMat z = x;
    Vector u = Vector::Zero(op.size());
    SymMat w = SymMat::zero(d);

    SolverResult result;
    SymMat best = z;
    double best_objective = (op.forward(z) - f).lpNorm<1>();
    int consecutive_ok = 0;
    SolveStatus status = SolveStatus::max_iters;

    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        const SymMat b = op.adjoint(y - u) + (z - w);
        x = ridge_solve(b);
        const Vector fx = op.forward(x);
        y = f + soft_threshold(fx + u - f, 1.0 / cfg.rho);
        const SymMat z_next = psd_project(x + w);
        u += fx - y;
        w += x - z_next;

        const double objective = (op.forward(z_next) - f).lpNorm<1>();
        if (objective < best_objective) {
            best_objective = objective;
            best = z_next;
        }
        const double primal_data = (fx - y).norm() / fscale;
        const double primal_split =
            (x - z_next).frobenius_norm() / std::max(1.0, x.frobenius_norm());
        z = z_next;
        consecutive_ok = std::max(primal_data, primal_split) <= cfg.tol ? consecutive_ok + 1 : 0;
        if (consecutive_ok >= 3) {
            status = SolveStatus::converged;
            ++it;
            break;
        }
    }
    detail::finalize_result(result, op, best, f, it, status, timer);
    return result;
}

} // namespace subphase
