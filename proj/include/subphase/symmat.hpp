#pragma once

#include "subphase/core.hpp"

#include <limits>
#include <sstream>
#include <utility>

namespace subphase {

/// Relative cutoff below which an eigenvalue counts as zero in rank tests:
/// |lambda| <= kEigenZeroRelTol * max|lambda|.
inline constexpr double kEigenZeroRelTol = 1e-9;

/// Dense real symmetric d x d matrix. Symmetry is an invariant of the type:
/// the checked constructor requires exact entry equality, `symmetrized`
/// averages (A + A^T)/2 for data read from files, and all operations below
/// return exactly symmetric results.
class SymMat {
public:
    explicit SymMat(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() < 1)
            throw std::invalid_argument("SymMat: matrix must be square with dim >= 1");
        for (Index j = 0; j < m_.cols(); ++j)
            for (Index i = j + 1; i < m_.rows(); ++i)
                if (m_(i, j) != m_(j, i))
                    throw std::invalid_argument("SymMat: input is not exactly symmetric");
    }

    /// Builds from possibly drifted data by averaging (A + A^T)/2.
    static SymMat symmetrized(const Matrix& m) {
        if (m.rows() != m.cols() || m.rows() < 1)
            throw std::invalid_argument("SymMat: matrix must be square with dim >= 1");
        Matrix s = 0.5 * (m + m.transpose());
        mirror_lower(s);
        return SymMat(std::move(s), Unchecked{});
    }

    /// Mirrors the lower triangle of `m` onto the upper one. Used after
    /// accumulations (GEMM, rank updates) whose rounding may break exact
    /// entry equality.
    static SymMat from_lower(Matrix m) {
        if (m.rows() != m.cols() || m.rows() < 1)
            throw std::invalid_argument("SymMat: matrix must be square with dim >= 1");
        mirror_lower(m);
        return SymMat(std::move(m), Unchecked{});
    }

    static SymMat zero(Index d) { return SymMat(Matrix::Zero(d, d), Unchecked{}); }
    static SymMat identity(Index d) { return SymMat(Matrix::Identity(d, d), Unchecked{}); }

    /// Rank-one matrix x x^T (entrywise construction is exactly symmetric).
    static SymMat outer(const Vector& x) {
        const Index d = x.size();
        Matrix m(d, d);
        for (Index j = 0; j < d; ++j)
            for (Index i = 0; i < d; ++i) m(i, j) = x(i) * x(j);
        return SymMat(std::move(m), Unchecked{});
    }

    Index dim() const { return m_.rows(); }
    const Matrix& mat() const { return m_; }
    double operator()(Index i, Index j) const { return m_(i, j); }
    double trace() const { return m_.trace(); }
    double frobenius_norm() const { return m_.norm(); }

    SymMat operator+(const SymMat& o) const {
        require_same_dim(o);
        return SymMat(m_ + o.m_, Unchecked{});
    }
    SymMat operator-(const SymMat& o) const {
        require_same_dim(o);
        return SymMat(m_ - o.m_, Unchecked{});
    }
    SymMat operator*(double s) const { return SymMat(s * m_, Unchecked{}); }
    friend SymMat operator*(double s, const SymMat& a) { return a * s; }
    SymMat& operator+=(const SymMat& o) {
        require_same_dim(o);
        m_ += o.m_;
        return *this;
    }
    SymMat& operator-=(const SymMat& o) {
        require_same_dim(o);
        m_ -= o.m_;
        return *this;
    }

private:
    struct Unchecked {};
    SymMat(Matrix m, Unchecked) : m_(std::move(m)) {}

    static void mirror_lower(Matrix& m) {
        for (Index j = 0; j < m.cols(); ++j)
            for (Index i = j + 1; i < m.rows(); ++i) m(j, i) = m(i, j);
    }

    void require_same_dim(const SymMat& o) const {
        if (o.dim() != dim()) throw std::invalid_argument("SymMat: dimension mismatch");
    }

    Matrix m_;
};

/// Spectral decomposition with eigenvalues sorted in descending order and
/// orthonormal eigenvectors as columns.
struct EigenDecomp {
    Vector eigenvalues;
    Matrix eigenvectors;
};

inline EigenDecomp eigendecompose(const SymMat& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.mat());
    if (solver.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "eigendecompose: solver failed on " << a.dim() << "x" << a.dim()
            << " matrix (frobenius " << a.frobenius_norm() << ", max entry "
            << a.mat().cwiseAbs().maxCoeff() << ")";
        throw NumericalError(msg.str());
    }
    EigenDecomp out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

/// <A, B> = trace(AB), evaluated as the entrywise sum (the two coincide for
/// symmetric matrices).
inline double frobenius_inner(const SymMat& a, const SymMat& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("frobenius_inner: dimension mismatch");
    return a.mat().cwiseProduct(b.mat()).sum();
}

struct MatrixNorms {
    double nuclear;
    double operator_norm;
    double frobenius;
};

inline MatrixNorms norms(const SymMat& a) {
    const Vector lam = eigendecompose(a).eigenvalues;
    MatrixNorms out;
    out.nuclear = lam.cwiseAbs().sum();
    out.operator_norm = lam.cwiseAbs().maxCoeff();
    out.frobenius = lam.norm();
    return out;
}

/// Frobenius-nearest positive semidefinite matrix: clip negative eigenvalues.
inline SymMat psd_project(const SymMat& a) {
    const EigenDecomp ed = eigendecompose(a);
    const Vector lam_pos = ed.eigenvalues.cwiseMax(0.0);
    Matrix r = ed.eigenvectors * lam_pos.asDiagonal() * ed.eigenvectors.transpose();
    return SymMat::from_lower(std::move(r));
}

/// Split of a symmetric matrix along the tangent space
/// T_x = {x y^T + y x^T : y} at the rank-one point x x^T.
struct TangentSplit {
    SymMat tangent;
    SymMat normal;
};

/// Requires a unit vector x (within 1e-12). tangent = P_x A + A P_x - P_x A P_x,
/// normal = A - tangent; the two parts are Frobenius-orthogonal.
inline TangentSplit tangent_project(const SymMat& a, const Vector& x) {
    if (x.size() != a.dim()) throw std::invalid_argument("tangent_project: dimension mismatch");
    if (std::abs(x.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("tangent_project: x must be a unit vector");
    const Index d = a.dim();
    const Vector v = a.mat() * x;
    const double s = x.dot(v);
    Matrix t(d, d);
    for (Index j = 0; j < d; ++j)
        for (Index i = j; i < d; ++i)
            t(i, j) = x(i) * v(j) + v(i) * x(j) - s * x(i) * x(j);
    SymMat tangent = SymMat::from_lower(std::move(t));
    SymMat normal = a - tangent;
    return TangentSplit{std::move(tangent), std::move(normal)};
}

} // namespace subphase
