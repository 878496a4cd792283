#pragma once

#include "subphase/symmat.hpp"

#include <utility>

namespace subphase {

/// k-dimensional subspace of R^d, stored as a d x k matrix with orthonormal
/// columns. The projector is Q Q^T but squared projection norms are computed
/// in the k-dimensional frame (never through the dense projector).
class Subspace {
public:
    explicit Subspace(Matrix basis) : basis_(std::move(basis)) {
        const Index d = basis_.rows();
        const Index k = basis_.cols();
        if (k < 1 || k > d)
            throw std::invalid_argument("Subspace: need 1 <= k <= d");
        const double drift =
            (basis_.transpose() * basis_ - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
        if (drift > 1e-10)
            throw std::invalid_argument("Subspace: basis columns are not orthonormal");
    }

    /// Column span of an arbitrary full-column-rank matrix, orthonormalized
    /// by Householder QR.
    static Subspace orthonormalized(const Matrix& spanning) {
        const Index d = spanning.rows();
        const Index k = spanning.cols();
        Eigen::ColPivHouseholderQR<Matrix> qr(spanning);
        if (qr.rank() < k)
            throw NumericalError("Subspace::orthonormalized: rank-deficient spanning set");
        Matrix q = qr.householderQ() * Matrix::Identity(d, k);
        return Subspace(std::move(q));
    }

    /// Draws from the invariant measure sigma_k: the span of a d x k matrix
    /// with i.i.d. standard normal entries. Rank deficiency has probability
    /// zero; redraw a few times before giving up.
    static Subspace sample_uniform(Index d, Index k, Rng& rng) {
        if (k < 1 || k > d)
            throw std::invalid_argument("Subspace::sample_uniform: need 1 <= k <= d");
        for (int attempt = 0; attempt < 5; ++attempt) {
            Matrix z = gaussian_matrix(d, k, rng);
            Eigen::ColPivHouseholderQR<Matrix> qr(z);
            if (qr.rank() < k) continue;
            Matrix q = qr.householderQ() * Matrix::Identity(d, k);
            return Subspace(std::move(q));
        }
        throw NumericalError("Subspace::sample_uniform: repeated rank-deficient draws");
    }

    Index ambient_dim() const { return basis_.rows(); }
    Index sub_dim() const { return basis_.cols(); }
    const Matrix& basis() const { return basis_; }

    SymMat projector() const {
        Matrix p = Matrix::Zero(ambient_dim(), ambient_dim());
        p.selfadjointView<Eigen::Lower>().rankUpdate(basis_);
        return SymMat::from_lower(std::move(p));
    }

    struct Projection {
        Vector component;
        double sq_norm;
    };

    Projection project(const Vector& x) const {
        if (x.size() != ambient_dim())
            throw std::invalid_argument("Subspace::project: dimension mismatch");
        const Vector coords = basis_.transpose() * x;
        return Projection{basis_ * coords, coords.squaredNorm()};
    }

    /// ||P_V x||^2 = ||Q^T x||^2 without forming the component.
    double projection_sq_norm(const Vector& x) const {
        return (basis_.transpose() * x).squaredNorm();
    }

private:
    Matrix basis_;
};

struct ProjectorDistance {
    double operator_norm;
    double frobenius;
};

/// Norms of P_a - P_b; the operator norm lies in [0, 1] for subspaces of the
/// same dimension.
inline ProjectorDistance projector_distance(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim() || a.sub_dim() != b.sub_dim())
        throw std::invalid_argument("projector_distance: mismatched subspace shapes");
    const SymMat diff = a.projector() - b.projector();
    const MatrixNorms n = norms(diff);
    return ProjectorDistance{n.operator_norm, n.frobenius};
}

/// Moment of the squared projection norm of a fixed unit vector under the
/// invariant measure: E ||P_V x||^{2p} = (k/2)_p / (d/2)_p.
inline double projection_moment(Index d, Index k, int p) {
    return pochhammer(0.5 * static_cast<double>(k), p) /
           pochhammer(0.5 * static_cast<double>(d), p);
}

} // namespace subphase
