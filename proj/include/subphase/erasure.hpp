#pragma once

#include "subphase/exact.hpp"

#include <algorithm>
#include <array>
#include <complex>
#include <vector>

namespace subphase {

using ComplexRoots = std::vector<std::complex<double>>;

/// The algebraic system (AE) for the p erased values: for l = 1..p,
///   sum_{j erased} w_j T_j^l = A_l - sum_{j observed} w_j t_j^l,
/// where A_l is the tight l-fusion frame constant of the (normalized) system.
struct PowerSumSystem {
    int p = 0;
    Vector rhs;                       // b_l, l = 1..p
    Vector weights;                   // weights of the erased subspaces
    std::vector<Index> erased_index;  // positions in the parent system
};

inline PowerSumSystem build_power_sum_system(const SubspaceSystem& sys, const Measurements& m) {
    if (!sys.is_normalized())
        throw std::invalid_argument("build_power_sum_system: weights must sum to one");
    if (m.size() != sys.size())
        throw std::invalid_argument("build_power_sum_system: measurement count mismatch");

    PowerSumSystem ps;
    for (Index j = 0; j < m.size(); ++j)
        if (!m.observed(j)) ps.erased_index.push_back(j);
    ps.p = static_cast<int>(ps.erased_index.size());
    ps.weights.resize(ps.p);
    for (int i = 0; i < ps.p; ++i) ps.weights(i) = sys.weight(ps.erased_index[static_cast<std::size_t>(i)]);

    ps.rhs.resize(ps.p);
    const Index d = sys.ambient_dim();
    const Index k = sys.sub_dim();
    for (int l = 1; l <= ps.p; ++l) {
        double observed_sum = 0.0;
        for (Index j = 0; j < sys.size(); ++j)
            if (m.observed(j)) observed_sum += sys.weight(j) * std::pow(m.values(j), l);
        ps.rhs(l - 1) = tight_bound_formula(d, k, l, 1.0) - observed_sum;
    }
    return ps;
}

/// Newton's identities: elementary symmetric polynomials e_1..e_p from the
/// power sums p_1..p_p, via e_j = (1/j) sum_{l=1}^{j} (-1)^{l-1} e_{j-l} p_l.
inline Vector elementary_from_power_sums(const Vector& power_sums) {
    const int p = static_cast<int>(power_sums.size());
    Vector e = Vector::Zero(p + 1);
    e(0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        double acc = 0.0;
        double sign = 1.0;
        for (int l = 1; l <= j; ++l) {
            acc += sign * e(j - l) * power_sums(l - 1);
            sign = -sign;
        }
        e(j) = acc / static_cast<double>(j);
    }
    return e.tail(p);
}

/// All complex roots of the monic polynomial T^p + c_{p-1} T^{p-1} + ... + c_0
/// (coefficients in ascending order, length p), via the companion-matrix
/// eigenvalue method.
inline ComplexRoots polynomial_roots(const Vector& ascending_coeffs) {
    const Index p = ascending_coeffs.size();
    if (p == 0) return {};
    if (p == 1) return {std::complex<double>(-ascending_coeffs(0), 0.0)};
    Matrix companion = Matrix::Zero(p, p);
    companion.block(1, 0, p - 1, p - 1).diagonal().setOnes();
    companion.col(p - 1) = -ascending_coeffs;
    Eigen::EigenSolver<Matrix> solver(companion);
    if (solver.info() != Eigen::Success)
        throw NumericalError("polynomial_roots: companion eigensolver failed");
    ComplexRoots roots(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) roots[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

/// Equal-weight case of (AE): the rhs determines the power sums
/// p_l = b_l / w, Newton's identities give the elementary symmetric
/// polynomials, and Vieta's formula the monic polynomial whose root multiset
/// is the solution, unique up to permutation. Returns the canonically sorted
/// multiset.
inline ComplexRoots solve_power_sums_equal_weights(const Vector& rhs, double common_weight) {
    if (!(common_weight > 0.0))
        throw std::invalid_argument("solve_power_sums_equal_weights: weight must be positive");
    const int p = static_cast<int>(rhs.size());
    if (p == 0) return {};
    const Vector power_sums = rhs / common_weight;
    const Vector e = elementary_from_power_sums(power_sums);
    // prod (T - t_i) = sum_j (-1)^j e_j T^{p-j}; coefficient of T^l is
    // (-1)^{p-l} e_{p-l}.
    Vector coeffs(p);
    for (int l = 0; l < p; ++l) {
        const int j = p - l;
        coeffs(l) = (j % 2 == 0 ? 1.0 : -1.0) * e(j - 1);
    }
    return polynomial_roots(coeffs);
}

/// Unequal weights, p = 2: eliminate T_2 = (b_1 - w_1 T_1) / w_2 into the
/// quadratic equation. Returns up to two ordered pairs (ordering matters when
/// the weights differ). A negative discriminant below -1e-12 yields no real
/// solution; |disc| <= 1e-12 yields one double solution.
inline std::vector<std::array<double, 2>> solve_power_sums_general_p2(double b1, double b2,
                                                                      double w1, double w2) {
    if (!(w1 > 0.0) || !(w2 > 0.0))
        throw std::invalid_argument("solve_power_sums_general_p2: weights must be positive");
    // w1 (w1 + w2) T^2 - 2 b1 w1 T + (b1^2 - b2 w2) = 0
    const double qa = w1 * (w1 + w2);
    const double qb = -2.0 * b1 * w1;
    const double qc = b1 * b1 - b2 * w2;
    const double disc = qb * qb - 4.0 * qa * qc;

    std::vector<std::array<double, 2>> solutions;
    const auto push = [&](double t1) {
        solutions.push_back({t1, (b1 - w1 * t1) / w2});
    };
    if (disc < -1e-12) return solutions;
    if (std::abs(disc) <= 1e-12) {
        push(-qb / (2.0 * qa));
        return solutions;
    }
    const double root = std::sqrt(disc);
    push((-qb - root) / (2.0 * qa));
    push((-qb + root) / (2.0 * qa));
    return solutions;
}

/// Max residual of (AE): max_l |sum_j w_j T_j^l - b_l|.
inline double power_sum_residual(const Vector& tuple, const Vector& weights, const Vector& rhs) {
    double worst = 0.0;
    for (int l = 1; l <= static_cast<int>(rhs.size()); ++l) {
        double acc = 0.0;
        for (Index j = 0; j < tuple.size(); ++j) acc += weights(j) * std::pow(tuple(j), l);
        worst = std::max(worst, std::abs(acc - rhs(l - 1)));
    }
    return worst;
}

struct DecodeConfig {
    double rank_tol = 1e-6;   // projector test: |lambda_1 - 1| and rank-1 residual
    double value_tol = 1e-9;  // admissible band [-value_tol, 1 + value_tol] and filters
};

struct DecodeDiagnostics {
    int root_tuples = 0;
    int complex_rejected = 0;
    int range_rejected = 0;
    int consistency_rejected = 0;
    int rank_rejected = 0;
};

/// Consistency filter on candidate tuples for the erased values: drops
/// complex roots, values outside [-tol, 1 + tol], and tuples violating
///   |t_i^{1/2} - t_j^{1/2}| <= ||P_{V_i} - P_{V_j}||_inf + tol
/// for any pair with at least one erased member.
inline std::vector<Vector> consistency_filter(const std::vector<ComplexRoots>& candidates,
                                              const std::vector<Index>& erased_index,
                                              const Measurements& m, const SubspaceSystem& sys,
                                              double tol, DecodeDiagnostics* diag = nullptr) {
    const std::size_t p = erased_index.size();

    // Pairwise operator-norm bounds: erased vs erased and erased vs observed.
    std::vector<std::vector<double>> erased_pair(p, std::vector<double>(p, 0.0));
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a + 1; b < p; ++b)
            erased_pair[a][b] =
                projector_distance(sys.subspace(erased_index[a]), sys.subspace(erased_index[b]))
                    .operator_norm;
    std::vector<std::vector<double>> obs_pair(p);
    std::vector<Index> observed_index;
    for (Index j = 0; j < sys.size(); ++j)
        if (m.observed(j)) observed_index.push_back(j);
    for (std::size_t a = 0; a < p; ++a) {
        obs_pair[a].resize(observed_index.size());
        for (std::size_t b = 0; b < observed_index.size(); ++b)
            obs_pair[a][b] =
                projector_distance(sys.subspace(erased_index[a]), sys.subspace(observed_index[b]))
                    .operator_norm;
    }

    const auto sqrt_clamped = [](double v) { return std::sqrt(std::max(v, 0.0)); };

    std::vector<Vector> kept;
    for (const ComplexRoots& tuple : candidates) {
        bool real = true;
        for (const auto& z : tuple)
            if (std::abs(z.imag()) > 1e-9) real = false;
        if (!real) {
            if (diag) ++diag->complex_rejected;
            continue;
        }
        Vector values(static_cast<Index>(tuple.size()));
        for (std::size_t i = 0; i < tuple.size(); ++i)
            values(static_cast<Index>(i)) = tuple[i].real();

        bool in_range = true;
        for (Index i = 0; i < values.size(); ++i)
            if (values(i) < -tol || values(i) > 1.0 + tol) in_range = false;
        if (!in_range) {
            if (diag) ++diag->range_rejected;
            continue;
        }

        bool consistent = true;
        for (std::size_t a = 0; a < p && consistent; ++a) {
            const double sa = sqrt_clamped(values(static_cast<Index>(a)));
            for (std::size_t b = a + 1; b < p && consistent; ++b) {
                const double sb = sqrt_clamped(values(static_cast<Index>(b)));
                if (std::abs(sa - sb) > erased_pair[a][b] + tol) consistent = false;
            }
            for (std::size_t b = 0; b < observed_index.size() && consistent; ++b) {
                const double sb = sqrt_clamped(m.values(observed_index[b]));
                if (std::abs(sa - sb) > obs_pair[a][b] + tol) consistent = false;
            }
        }
        if (!consistent) {
            if (diag) ++diag->consistency_rejected;
            continue;
        }
        kept.push_back(std::move(values));
    }
    return kept;
}

/// One decoded candidate: a unit-norm signal together with the erased values
/// and the root tuple that produced it.
struct Candidate {
    Vector signal;
    Vector erased_values;
    double rank1_residual = 0.0;
    int root_index = 0;  // provenance: index of the surviving root tuple
};

struct CandidateList {
    std::vector<Candidate> entries;
    DecodeDiagnostics diagnostics;
    std::size_t size() const { return entries.size(); }
};

namespace detail {

/// All distinct orderings of a root multiset (duplicates collapse).
inline std::vector<Vector> distinct_permutations(Vector values) {
    std::vector<double> v(values.data(), values.data() + values.size());
    std::sort(v.begin(), v.end());
    std::vector<Vector> out;
    do {
        out.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

} // namespace detail

/// List decoding (erased positions known, x assumed on the unit sphere). The
/// system must be a tight p-fusion frame and strength-4 cubature with weights
/// summing to one; verification is the caller's responsibility. Output
/// contains at most 2 * p! signals, sorted by rank-one residual.
inline CandidateList list_decode(const SubspaceSystem& sys, const Measurements& m,
                                 const DecodeConfig& cfg = {}) {
    if (!sys.is_normalized())
        throw std::invalid_argument("list_decode: weights must sum to one");
    if (m.size() != sys.size())
        throw std::invalid_argument("list_decode: measurement count mismatch");

    const Index d = sys.ambient_dim();
    const Index k = sys.sub_dim();
    const CubatureConstants c = cubature_constants(d, k);

    CandidateList list;

    const PowerSumSystem ps = build_power_sum_system(sys, m);
    const int p = ps.p;

    // Candidate tuples for the erased values, as solutions of (AE).
    std::vector<Vector> tuples;
    if (p == 0) {
        tuples.emplace_back(Vector(0));
        list.diagnostics.root_tuples = 1;
    } else {
        bool equal_weights = true;
        for (int i = 1; i < p; ++i)
            if (std::abs(ps.weights(i) - ps.weights(0)) >
                1e-12 * std::max(1.0, std::abs(ps.weights(0))))
                equal_weights = false;

        std::vector<ComplexRoots> raw;
        if (equal_weights) {
            const ComplexRoots multiset = solve_power_sums_equal_weights(ps.rhs, ps.weights(0));
            bool all_real = true;
            for (const auto& z : multiset)
                if (std::abs(z.imag()) > 1e-9) all_real = false;
            if (all_real) {
                Vector values(p);
                for (int i = 0; i < p; ++i) values(i) = multiset[static_cast<std::size_t>(i)].real();
                for (Vector& tup : detail::distinct_permutations(values)) {
                    ComplexRoots t(static_cast<std::size_t>(p));
                    for (int i = 0; i < p; ++i) t[static_cast<std::size_t>(i)] = tup(i);
                    raw.push_back(std::move(t));
                }
            } else {
                raw.push_back(multiset);  // rejected below, counted in diagnostics
            }
        } else if (p == 2) {
            for (const auto& sol : solve_power_sums_general_p2(ps.rhs(0), ps.rhs(1), ps.weights(0),
                                                               ps.weights(1)))
                raw.push_back({std::complex<double>(sol[0], 0.0), std::complex<double>(sol[1], 0.0)});
        } else {
            throw UnsupportedError(
                "list_decode: unequal erased weights with p > 2 require algebraic machinery "
                "outside this library's scope");
        }
        list.diagnostics.root_tuples = static_cast<int>(raw.size());
        tuples = consistency_filter(raw, ps.erased_index, m, sys, cfg.value_tol, &list.diagnostics);
    }

    // Step 3 of the list reconstruction: substitute each tuple, apply the
    // closed-form map with trace pinned to one (x is assumed unit norm), and
    // keep the result iff it is a rank-one projector.
    int tuple_index = 0;
    for (const Vector& tuple : tuples) {
        Matrix acc = Matrix::Zero(d, d);
        for (Index j = 0; j < sys.size(); ++j) {
            const double tj = m.observed(j) ? m.values(j) : 0.0;
            if (m.observed(j) && tj != 0.0)
                acc.selfadjointView<Eigen::Lower>().rankUpdate(sys.subspace(j).basis(),
                                                               sys.weight(j) * tj);
        }
        for (int i = 0; i < p; ++i) {
            const Index j = ps.erased_index[static_cast<std::size_t>(i)];
            if (tuple(i) != 0.0)
                acc.selfadjointView<Eigen::Lower>().rankUpdate(sys.subspace(j).basis(),
                                                               sys.weight(j) * tuple(i));
        }
        acc *= c.a1;
        acc.diagonal().array() -= c.a2;
        const SymMat projector_candidate = SymMat::from_lower(std::move(acc));

        const SignalEstimate est = extract_signal(projector_candidate);
        const bool rank_one = !est.ambiguous && std::abs(est.scale - 1.0) <= cfg.rank_tol &&
                              est.rank1_residual <= cfg.rank_tol;
        if (!rank_one) {
            ++list.diagnostics.rank_rejected;
            ++tuple_index;
            continue;
        }
        const Vector xi = est.signal / est.signal.norm();
        list.entries.push_back(Candidate{xi, tuple, est.rank1_residual, tuple_index});
        list.entries.push_back(Candidate{-xi, tuple, est.rank1_residual, tuple_index});
        ++tuple_index;
    }

    std::sort(list.entries.begin(), list.entries.end(), [](const Candidate& a, const Candidate& b) {
        if (a.rank1_residual != b.rank1_residual) return a.rank1_residual < b.rank1_residual;
        return std::lexicographical_compare(a.signal.data(), a.signal.data() + a.signal.size(),
                                            b.signal.data(), b.signal.data() + b.signal.size());
    });
    return list;
}

} // namespace subphase
