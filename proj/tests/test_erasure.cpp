#include "test_util.hpp"

#include <cmath>
#include <set>

namespace subphase {
namespace {

Vector power_sums_of(const Vector& values, const Vector& weights) {
    Vector rhs(values.size());
    for (int l = 1; l <= values.size(); ++l) {
        double acc = 0.0;
        for (Index j = 0; j < values.size(); ++j) acc += weights(j) * std::pow(values(j), l);
        rhs(l - 1) = acc;
    }
    return rhs;
}

/// Rotated equiangular-line cubature with two weight groups; the union of two
/// cubatures with convex weights is again a cubature.
SubspaceSystem two_group_cubature(int n1, int n2, double alpha, double offset) {
    std::vector<Subspace> lines;
    Vector weights(n1 + n2);
    for (int j = 0; j < n1; ++j) {
        Matrix basis(2, 1);
        const double angle = M_PI * static_cast<double>(j) / n1;
        basis << std::cos(angle), std::sin(angle);
        lines.emplace_back(std::move(basis));
        weights(j) = alpha / n1;
    }
    for (int j = 0; j < n2; ++j) {
        Matrix basis(2, 1);
        const double angle = M_PI * static_cast<double>(j) / n2 + offset;
        basis << std::cos(angle), std::sin(angle);
        lines.emplace_back(std::move(basis));
        weights(n1 + j) = (1.0 - alpha) / n2;
    }
    return SubspaceSystem(std::move(lines), std::move(weights));
}

TEST(Erasure, LinearCaseSingleRoot) {
    Vector rhs(1);
    rhs << 0.42;
    const ComplexRoots roots = solve_power_sums_equal_weights(rhs, 0.1);
    ASSERT_EQ(roots.size(), 1u);
    EXPECT_NEAR(roots[0].real(), 4.2, 1e-12);
    EXPECT_NEAR(roots[0].imag(), 0.0, 1e-12);
}

TEST(Erasure, QuadraticCaseWorkedExample) {
    // t = (0.3, 0.7), w = 1: p1 = 1.0, p2 = 0.58, e1 = 1.0, e2 = 0.21,
    // T^2 - T + 0.21 factors back into {0.3, 0.7}
    Vector t(2);
    t << 0.3, 0.7;
    const Vector rhs = power_sums_of(t, Vector::Constant(2, 1.0));
    EXPECT_NEAR(rhs(0), 1.0, 1e-15);
    EXPECT_NEAR(rhs(1), 0.58, 1e-15);
    const Vector e = elementary_from_power_sums(rhs);
    EXPECT_NEAR(e(0), 1.0, 1e-15);
    EXPECT_NEAR(e(1), 0.21, 1e-15);
    const ComplexRoots roots = solve_power_sums_equal_weights(rhs, 1.0);
    ASSERT_EQ(roots.size(), 2u);
    EXPECT_NEAR(roots[0].real(), 0.3, 1e-10);
    EXPECT_NEAR(roots[1].real(), 0.7, 1e-10);
}

TEST(Erasure, CubicRoundTrip) {
    Vector t(3);
    t << 0.1, 0.2, 0.5;
    const Vector rhs = power_sums_of(t, Vector::Constant(3, 1.0));
    const ComplexRoots roots = solve_power_sums_equal_weights(rhs, 1.0);
    ASSERT_EQ(roots.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(roots[static_cast<std::size_t>(i)].real(), t(i), 1e-10);
        EXPECT_NEAR(roots[static_cast<std::size_t>(i)].imag(), 0.0, 1e-10);
    }
}

TEST(Erasure, NewtonVietaRoundTripRandomMultisets) {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = 1 + static_cast<int>(rng() % 5);
        Vector t(p);
        for (int i = 0; i < p; ++i) t(i) = uniform_unit(rng);
        std::sort(t.data(), t.data() + p);
        const double w = 0.05 + uniform_unit(rng);
        const ComplexRoots roots = solve_power_sums_equal_weights(
            power_sums_of(t, Vector::Constant(p, w)), w);
        ASSERT_EQ(roots.size(), static_cast<std::size_t>(p));
        for (int i = 0; i < p; ++i) {
            EXPECT_NEAR(roots[static_cast<std::size_t>(i)].real(), t(i), 1e-8);
            EXPECT_NEAR(roots[static_cast<std::size_t>(i)].imag(), 0.0, 1e-8);
        }
    }
}

TEST(Erasure, GeneralWeightsReduceToEqualCase) {
    Vector t(2);
    t << 0.3, 0.7;
    const Vector rhs = power_sums_of(t, Vector::Constant(2, 1.0));
    const auto solutions = solve_power_sums_general_p2(rhs(0), rhs(1), 1.0, 1.0);
    ASSERT_EQ(solutions.size(), 2u);
    // both orderings appear
    EXPECT_NEAR(solutions[0][0], 0.3, 1e-10);
    EXPECT_NEAR(solutions[0][1], 0.7, 1e-10);
    EXPECT_NEAR(solutions[1][0], 0.7, 1e-10);
    EXPECT_NEAR(solutions[1][1], 0.3, 1e-10);
}

TEST(Erasure, GeneralWeightsWorkedExample) {
    // w = (0.25, 0.75), t = (0.4, 0.2): b1 = 0.25, b2 = 0.07
    Vector t(2);
    t << 0.4, 0.2;
    Vector w(2);
    w << 0.25, 0.75;
    const Vector rhs = power_sums_of(t, w);
    EXPECT_NEAR(rhs(0), 0.25, 1e-15);
    EXPECT_NEAR(rhs(1), 0.07, 1e-15);
    const auto solutions = solve_power_sums_general_p2(rhs(0), rhs(1), w(0), w(1));
    bool found = false;
    for (const auto& sol : solutions)
        if (std::abs(sol[0] - 0.4) < 1e-10 && std::abs(sol[1] - 0.2) < 1e-10) found = true;
    EXPECT_TRUE(found);
    for (const auto& sol : solutions) {
        Vector tuple(2);
        tuple << sol[0], sol[1];
        EXPECT_LE(power_sum_residual(tuple, w, rhs), 1e-12);
    }
}

TEST(Erasure, GeneralWeightsInfeasibleRhs) {
    // Cauchy-Schwarz forces b2 >= b1^2 / (w1 + w2); violate it
    const auto solutions = solve_power_sums_general_p2(1.0, 0.9, 0.5, 0.5);
    EXPECT_TRUE(solutions.empty());
}

TEST(Erasure, ConsistencyFilterValueRange) {
    const SubspaceSystem sys = equiangular_line_system(5);
    const Measurements m = erase(measure(sys, Vector::Unit(2, 0)), {0});
    const std::vector<Index> erased = {0};
    // 1.3 exceeds ||P_V x||^2 <= 1 for unit x
    std::vector<ComplexRoots> candidates = {{std::complex<double>(1.3, 0.0)},
                                            {std::complex<double>(0.5, 0.0)}};
    DecodeDiagnostics diag;
    const auto kept = consistency_filter(candidates, erased, m, sys, 1e-9, &diag);
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_NEAR(kept[0](0), 0.5, 1e-15);
    EXPECT_EQ(diag.range_rejected, 1);
}

TEST(Erasure, ConsistencyFilterComplexRoots) {
    const SubspaceSystem sys = equiangular_line_system(5);
    const Measurements m = erase(measure(sys, Vector::Unit(2, 0)), {0, 1});
    const std::vector<Index> erased = {0, 1};
    std::vector<ComplexRoots> candidates = {
        {std::complex<double>(0.5, 0.2), std::complex<double>(0.5, -0.2)}};
    DecodeDiagnostics diag;
    const auto kept = consistency_filter(candidates, erased, m, sys, 1e-9, &diag);
    EXPECT_TRUE(kept.empty());
    EXPECT_EQ(diag.complex_rejected, 1);
}

TEST(Erasure, ConsistencyFilterIdenticalSubspaces) {
    // duplicate line: operator distance 0 forces equal erased values
    std::vector<Subspace> lines;
    Matrix e1(2, 1), diag1(2, 1);
    e1 << 1.0, 0.0;
    diag1 << M_SQRT1_2, M_SQRT1_2;
    lines.emplace_back(e1);
    lines.emplace_back(e1);
    lines.emplace_back(diag1);
    const SubspaceSystem sys = SubspaceSystem::equal_weights(lines);
    Measurements m = Measurements::complete(Vector::Constant(3, 0.5));
    m = erase(m, {0, 1});
    const std::vector<Index> erased = {0, 1};
    std::vector<ComplexRoots> candidates = {
        {std::complex<double>(0.2, 0.0), std::complex<double>(0.8, 0.0)},
        {std::complex<double>(0.6, 0.0), std::complex<double>(0.6, 0.0)}};
    DecodeDiagnostics diag;
    const auto kept = consistency_filter(candidates, erased, m, sys, 1e-9, &diag);
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_NEAR(kept[0](0), 0.6, 1e-15);
    EXPECT_EQ(diag.consistency_rejected, 1);
}

TEST(Erasure, ListDecodeNoErasuresGivesSignPair) {
    Rng rng(2);
    const SubspaceSystem sys = equiangular_line_system(5);
    const Vector x = random_unit_vector(2, rng);
    const CandidateList list = list_decode(sys, measure(sys, x));
    ASSERT_EQ(list.size(), 2u);
    EXPECT_LE(signed_distance(list.entries[0].signal, x), 1e-8);
    EXPECT_LE((list.entries[0].signal + list.entries[1].signal).norm(), 1e-12);
}

TEST(Erasure, ListDecodeSingleErasure) {
    Rng rng(3);
    const SubspaceSystem sys = equiangular_line_system(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = random_unit_vector(2, rng);
        const Index pos = static_cast<Index>(rng() % 5);
        const CandidateList list = list_decode(sys, erase(measure(sys, x), {pos}));
        EXPECT_LE(list.size(), 2u);  // |L| <= 2 * 1!
        double best = 1e9;
        for (const Candidate& c : list.entries) best = std::min(best, (c.signal - x).norm());
        EXPECT_LE(best, 1e-6);
    }
}

TEST(Erasure, ListDecodeTwoErasuresContainsSignal) {
    Rng rng(4);
    const SubspaceSystem sys = equiangular_line_system(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Vector x = random_unit_vector(2, rng);
        const Index a = static_cast<Index>(rng() % 5);
        Index b = static_cast<Index>(rng() % 5);
        while (b == a) b = static_cast<Index>(rng() % 5);
        const CandidateList list = list_decode(sys, erase(measure(sys, x), {a, b}));
        EXPECT_LE(list.size(), 4u);  // |L| <= 2 * 2!
        double best = 1e9;
        for (const Candidate& c : list.entries) best = std::min(best, (c.signal - x).norm());
        EXPECT_LE(best, 1e-6);
    }
}

TEST(Erasure, ListDecodeRoundTripCompleteness) {
    // p in {1, 2, 3}: the true signal always appears, and root tuples solve (AE)
    Rng rng(5);
    const SubspaceSystem sys = equiangular_line_system(6);
    int trials_per_p = 67;
    for (int p = 1; p <= 3; ++p) {
        for (int trial = 0; trial < trials_per_p; ++trial) {
            const Vector x = random_unit_vector(2, rng);
            std::set<Index> positions;
            while (static_cast<int>(positions.size()) < p)
                positions.insert(static_cast<Index>(rng() % 6));
            const Measurements m =
                erase(measure(sys, x), std::vector<Index>(positions.begin(), positions.end()));
            const CandidateList list = list_decode(sys, m);
            EXPECT_LE(list.size(), 2u * static_cast<std::size_t>(p == 3 ? 6 : (p == 2 ? 2 : 1)));
            double best = 1e9;
            for (const Candidate& c : list.entries) best = std::min(best, (c.signal - x).norm());
            EXPECT_LE(best, 1e-6) << "p=" << p << " trial=" << trial;

            const PowerSumSystem ps = build_power_sum_system(sys, m);
            for (const Candidate& c : list.entries)
                EXPECT_LE(power_sum_residual(c.erased_values, ps.weights, ps.rhs), 1e-8);
        }
    }
}

TEST(Erasure, ListDecodeUnequalWeights) {
    // two-group cubature (offset avoids duplicate lines); erase one line from
    // each group so the unequal-weight p = 2 path runs
    Rng rng(6);
    const SubspaceSystem sys = two_group_cubature(5, 7, 0.4, 0.35);
    ASSERT_TRUE(verify_cubature4(sys).is_cubature);
    for (int trial = 0; trial < 25; ++trial) {
        const Vector x = random_unit_vector(2, rng);
        const Index a = static_cast<Index>(rng() % 5);
        const Index b = 5 + static_cast<Index>(rng() % 7);
        const CandidateList list = list_decode(sys, erase(measure(sys, x), {a, b}));
        EXPECT_LE(list.size(), 4u);
        double best = 1e9;
        for (const Candidate& c : list.entries) best = std::min(best, (c.signal - x).norm());
        EXPECT_LE(best, 1e-6);
    }
}

TEST(Erasure, ListDecodeUnequalWeightsBeyondP2Unsupported) {
    Rng rng(7);
    const SubspaceSystem sys = two_group_cubature(5, 7, 0.4, 0.35);
    const Vector x = random_unit_vector(2, rng);
    const Measurements m = erase(measure(sys, x), {0, 1, 5});  // mixed weights, p = 3
    EXPECT_THROW(list_decode(sys, m), UnsupportedError);
}

TEST(Erasure, ListDecodeEqualWeightSubsetOfUnequalSystem) {
    // erasing within one weight group still uses the Newton/Vieta path
    Rng rng(8);
    const SubspaceSystem sys = two_group_cubature(5, 7, 0.4, 0.35);
    const Vector x = random_unit_vector(2, rng);
    const CandidateList list = list_decode(sys, erase(measure(sys, x), {5, 6, 7}));
    double best = 1e9;
    for (const Candidate& c : list.entries) best = std::min(best, (c.signal - x).norm());
    EXPECT_LE(best, 1e-6);
}

TEST(Erasure, ListDecodeReportsDiagnosticsOnGarbageData) {
    // corrupt observed values so no candidate can survive the projector test
    const SubspaceSystem sys = equiangular_line_system(5);
    Vector bogus(5);
    bogus << 0.9, 0.9, 0.9, 0.0, 0.0;
    Measurements m = Measurements::complete(bogus);
    m = erase(m, {3, 4});
    const CandidateList list = list_decode(sys, m);
    EXPECT_TRUE(list.entries.empty());
    const DecodeDiagnostics& diag = list.diagnostics;
    EXPECT_GT(diag.complex_rejected + diag.range_rejected + diag.consistency_rejected +
                  diag.rank_rejected,
              0);
}

} // namespace
} // namespace subphase
