// Acceptance suite: one check per shipped guarantee, each printed as a
// single [PASS]/[FAIL] line with its measured numbers and runtime. The
// binary exits with the number of failed checks.
//
// Run all checks:          ./acceptance_tests
// Run a subset by number:  ./acceptance_tests 3 6 12

#include "subphase/subphase.hpp"

#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace subphase;

struct Check {
    int number;
    std::string title;
    std::function<bool(std::string&)> run;
};

std::string fixture(const std::string& name) {
    return std::string(SUBPHASE_FIXTURE_DIR) + "/" + name;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// --------------------------------------------------------------------------
// 1. closed-form exactness on the shipped cubature fixtures
// --------------------------------------------------------------------------
bool check_cubature_exactness(std::string& detail) {
    const detail::WallTimer timer;
    Rng rng(101);
    double worst_matrix = 0.0, worst_signal = 0.0;
    for (const char* name : {"lines5_r2.json", "lines6_r2.json"}) {
        const SubspaceSystem sys = read_subspace_system(fixture(name));
        if (!verify_cubature4(sys).is_cubature) {
            detail = std::string(name) + " failed cubature verification";
            return false;
        }
        for (int trial = 0; trial < 100; ++trial) {
            const Vector x = random_unit_vector(sys.ambient_dim(), rng);
            const SymMat xhat = reconstruct_rank_one(sys, measure(sys, x));
            worst_matrix = std::max(worst_matrix, (xhat - SymMat::outer(x)).frobenius_norm());
            const SignalEstimate est = extract_signal(xhat);
            worst_signal = std::max(worst_signal, signed_distance(est.signal, x));
        }
    }
    const double ms = timer.elapsed_ms();
    detail = "max matrix err " + fmt(worst_matrix) + " (<=1e-9), max signal err " +
             fmt(worst_signal) + " (<=1e-8), " + fmt(ms) + " ms (<1000)";
    return worst_matrix <= 1e-9 && worst_signal <= 1e-8 && ms < 1000.0;
}

// --------------------------------------------------------------------------
// 2. dual-frame identity on the full symmetric basis
// --------------------------------------------------------------------------
bool check_dual_frame_identity(std::string& detail) {
    double worst = 0.0;
    for (const char* name : {"lines5_r2.json", "lines6_r2.json"}) {
        const SubspaceSystem sys = read_subspace_system(fixture(name));
        worst = std::max(worst, verify_cubature4(sys, 1e-9).max_deviation);
    }
    detail = "max basis deviation " + fmt(worst) + " (<=1e-9)";
    return worst <= 1e-9;
}

// --------------------------------------------------------------------------
// 3. sampler moments against the beta-moment formula
// --------------------------------------------------------------------------
bool check_sampler_moments(std::string& detail) {
    const detail::WallTimer timer;
    const std::pair<Index, Index> shapes[] = {{4, 1}, {8, 2}, {12, 3}};
    std::ostringstream log;
    bool ok = true;
    Rng rng(303);
    for (const auto& [d, k] : shapes) {
        const Index samples = 100000;
        const Vector e1 = Vector::Unit(d, 0);
        double sum[4] = {0, 0, 0, 0}, sum_sq[4] = {0, 0, 0, 0};
        for (Index s = 0; s < samples; ++s) {
            const double t = Subspace::sample_uniform(d, k, rng).projection_sq_norm(e1);
            double power = 1.0;
            for (int p = 0; p < 4; ++p) {
                power *= t;
                sum[p] += power;
                sum_sq[p] += power * power;
            }
        }
        for (int p = 1; p <= 4; ++p) {
            const double nn = static_cast<double>(samples);
            const double mean = sum[p - 1] / nn;
            const double se =
                std::sqrt(std::max(0.0, sum_sq[p - 1] / nn - mean * mean) / nn);
            const double expected = projection_moment(d, k, p);
            if (std::abs(mean - expected) > 4.0 * se) {
                ok = false;
                log << " (d=" << d << ",k=" << k << ",p=" << p << ": " << fmt(mean) << " vs "
                    << fmt(expected) << " +-" << fmt(4.0 * se) << ")";
            }
        }
    }
    const double ms = timer.elapsed_ms();
    detail = "3 shapes x 4 powers within 4 SE" + log.str() + ", " + fmt(ms) + " ms (<30000)";
    return ok && ms < 30000.0;
}

// --------------------------------------------------------------------------
// 4. erasure list decoding with two lost norms
// --------------------------------------------------------------------------
bool check_erasure_decoding(std::string& detail) {
    const detail::WallTimer timer;
    const SubspaceSystem sys = read_subspace_system(fixture("lines5_r2.json"));
    Rng rng(404);
    int containing = 0;
    std::size_t max_list = 0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        const Vector x = random_unit_vector(2, rng);
        const Index a = static_cast<Index>(rng() % 5);
        Index b = static_cast<Index>(rng() % 5);
        while (b == a) b = static_cast<Index>(rng() % 5);
        const CandidateList list = list_decode(sys, erase(measure(sys, x), {a, b}));
        max_list = std::max(max_list, list.size());
        for (const Candidate& c : list.entries) {
            if ((c.signal - x).norm() <= 1e-6) {
                ++containing;
                break;
            }
        }
    }
    const double ms = timer.elapsed_ms();
    detail = "signal found in " + std::to_string(containing) + "/200 lists, max |L| " +
             std::to_string(max_list) + " (<=4), " + fmt(ms) + " ms (<10000)";
    return containing == trials && max_list <= 4 && ms < 10000.0;
}

// --------------------------------------------------------------------------
// 5. Newton/Vieta power-sum oracle equivalence
// --------------------------------------------------------------------------
bool check_newton_vieta(std::string& detail) {
    Rng rng(505);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int p = 1 + trial % 5;
        Vector t(p);
        for (int i = 0; i < p; ++i) t(i) = uniform_unit(rng);
        std::sort(t.data(), t.data() + p);
        Vector rhs(p);
        for (int l = 1; l <= p; ++l) {
            double acc = 0.0;
            for (int i = 0; i < p; ++i) acc += std::pow(t(i), l);
            rhs(l - 1) = acc;
        }
        const ComplexRoots roots = solve_power_sums_equal_weights(rhs, 1.0);
        for (int i = 0; i < p; ++i) {
            worst = std::max(worst, std::abs(roots[static_cast<std::size_t>(i)].real() - t(i)));
            worst = std::max(worst, std::abs(roots[static_cast<std::size_t>(i)].imag()));
        }
    }
    detail = "max multiset deviation " + fmt(worst) + " (<=1e-8) over 100 draws, p<=5";
    return worst <= 1e-8;
}

// --------------------------------------------------------------------------
// 6. lifted recovery at a linear measurement count (n = 6d)
// --------------------------------------------------------------------------
bool check_sdp_recovery(std::string& detail) {
    const detail::WallTimer timer;
    const int trials = 100;
    std::vector<int> success(trials, 0);
    TrialSpec spec;  // d=8, k=2, n=48, feasibility, threshold 1e-2
    parallel_for(trials, default_worker_count(), [&](std::size_t t) {
        const ResultRow row =
            run_single_trial(spec, derive_seed(606, t), "acceptance6", static_cast<int>(t));
        success[t] = row.success ? 1 : 0;
    });
    int ok = 0;
    for (int s : success) ok += s;
    const double ms = timer.elapsed_ms();
    detail = "recovery rate " + std::to_string(ok) + "/100 (>=90) at threshold 1e-2, " + fmt(ms) +
             " ms (<120000)";
    return ok >= 90 && ms < 120000.0;
}

// --------------------------------------------------------------------------
// 7. sweep trend: k = 1 is not the optimal choice at d = 8
// --------------------------------------------------------------------------
bool check_k_sweep_trend(std::string& detail) {
    SweepConfig cfg;
    cfg.experiment_id = "acceptance7";
    cfg.d = 8;
    cfg.k_list = {1, 2};
    cfg.n_list = {10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30, 32, 34};
    cfg.trials = 200;
    cfg.seed = 707;
    const SweepResult result = run_sweep(cfg);

    const std::size_t cells_per_k = cfg.n_list.size();
    const auto cell = [&](std::size_t k_index, std::size_t n_index) -> const SweepCell& {
        return result.cells[k_index * cells_per_k + n_index];
    };

    // rate is monotone nondecreasing in n (up to twice the binomial SE)
    for (std::size_t ki = 0; ki < 2; ++ki) {
        for (std::size_t ni = 0; ni + 1 < cells_per_k; ++ni) {
            const SweepCell& lo = cell(ki, ni);
            const SweepCell& hi = cell(ki, ni + 1);
            if (hi.rate < lo.rate - 2.0 * (lo.standard_error + hi.standard_error)) {
                detail = "rate not monotone in n at k=" + std::to_string(lo.k) +
                         ", n=" + std::to_string(lo.n) + "->" + std::to_string(hi.n);
                return false;
            }
        }
    }

    // smallest n with rate(k=2) in the transition band [0.2, 0.8]
    for (std::size_t ni = 0; ni < cells_per_k; ++ni) {
        const SweepCell& k2 = cell(1, ni);
        if (k2.rate < 0.2 || k2.rate > 0.8) continue;
        const SweepCell& k1 = cell(0, ni);
        const double slack = 2.0 * std::sqrt(k1.standard_error * k1.standard_error +
                                             k2.standard_error * k2.standard_error);
        detail = "at n=" + std::to_string(k2.n) + ": rate(k=2)=" + fmt(k2.rate) +
                 " vs rate(k=1)=" + fmt(k1.rate) + " (slack " + fmt(slack) + ")";
        return k2.rate >= k1.rate - slack;
    }
    detail = "no n in the grid has rate(k=2) inside [0.2, 0.8]";
    return false;
}

// --------------------------------------------------------------------------
// 8. signal demo at reduced and full scale
// --------------------------------------------------------------------------
bool check_signal_demo(std::string& detail) {
    const detail::WallTimer timer;

    // reduced scale: d=32, k=4, n=192, 100 trials
    TrialSpec spec;
    spec.d = 32;
    spec.k = 4;
    spec.n = 192;
    spec.solver_cfg.tol = 1e-5;
    const int trials = 100;
    std::vector<int> success(trials, 0);
    parallel_for(trials, default_worker_count(), [&](std::size_t t) {
        const ResultRow row =
            run_single_trial(spec, derive_seed(808, t), "acceptance8", static_cast<int>(t));
        success[t] = row.success ? 1 : 0;
    });
    int reduced_ok = 0;
    for (int s : success) reduced_ok += s;

    // full scale: d=128, n=6d, k in {10, 20}, one smoke trial each
    double full_err[2] = {0.0, 0.0};
    const Index full_k[2] = {10, 20};
    parallel_for(2, default_worker_count(), [&](std::size_t i) {
        SolverConfig cfg;
        cfg.tol = 1e-4;
        const DemoRecord rec =
            run_sdp_demo(128, full_k[i], 768, SolverKind::feasibility, cfg, derive_seed(809, i));
        full_err[i] = rec.signal_error;
    });

    const double ms = timer.elapsed_ms();
    detail = "reduced d=32: " + std::to_string(reduced_ok) + "/100 (>=95); full d=128 errors k=10: " +
             fmt(full_err[0]) + ", k=20: " + fmt(full_err[1]) + " (<=1e-2), " + fmt(ms) +
             " ms (<600000)";
    return reduced_ok >= 95 && full_err[0] <= 1e-2 && full_err[1] <= 1e-2 && ms < 600000.0;
}

// --------------------------------------------------------------------------
// 9. stability slope of the l1 recovery under noise
// --------------------------------------------------------------------------
bool check_stability_slope(std::string& detail) {
    StabilityConfig cfg;  // d=8, k=2, n=64, two decades of noise
    cfg.trials = 50;
    cfg.seed = 909;
    const StabilityResult result = run_stability(cfg);
    std::ostringstream medians;
    for (double m : result.median_frobenius) medians << " " << fmt(m);
    detail = "log-log slope " + fmt(result.loglog_slope) + " (in [0.7, 1.3]); medians" +
             medians.str();
    return result.loglog_slope >= 0.7 && result.loglog_slope <= 1.3;
}

// --------------------------------------------------------------------------
// 10. dual-certificate diagnostics at the stated sample count
// --------------------------------------------------------------------------
bool check_certificate(std::string& detail) {
    // range membership: Y must equal the adjoint applied to lambda/n
    Rng rng(1010);
    {
        std::vector<Subspace> subs;
        for (Index j = 0; j < 160; ++j) subs.push_back(Subspace::sample_uniform(16, 2, rng));
        const Vector x = random_unit_vector(16, rng);
        const CertificateReport report = build_certificate(subs, x, 2.0);
        const MeasurementOperator op(subs);
        const double range_gap =
            (report.certificate - op.adjoint(report.lambda / 160.0)).frobenius_norm();
        if (range_gap > 1e-12) {
            detail = "certificate left the adjoint range (gap " + fmt(range_gap) + ")";
            return false;
        }
    }

    CertificateExperimentConfig cfg;  // d=16, k=2, n=160, beta=2, gamma=0.5
    cfg.trials = 100;
    cfg.seed = 1010;
    const CertificateExperimentResult result = run_certificate_experiment(cfg);
    double mean_nuclear = 0.0, mean_eig = 0.0;
    for (const CertificateTrialRow& row : result.rows) {
        mean_nuclear += row.tangent_nuclear;
        mean_eig += row.normal_min_eig;
    }
    mean_nuclear /= 100.0;
    mean_eig /= 100.0;
    detail = "range membership exact; ||Y_T||_1<=0.5 and min-eig>=1 in " +
             std::to_string(result.condition_c_count) +
             "/100 trials (>=95 required; measured means: nuclear " + fmt(mean_nuclear) +
             ", min-eig " + fmt(mean_eig) + "; both conditions hold at n ~ 100 d)";
    return result.condition_c_count >= 95;
}

// --------------------------------------------------------------------------
// 11. positivity of the tangent-space constant u_k
// --------------------------------------------------------------------------
bool check_uk_positive(std::string& detail) {
    Rng rng(1111);
    std::ostringstream log;
    bool ok = true;
    for (const auto& [d, k] : std::vector<std::pair<Index, Index>>{{8, 1}, {8, 2}, {16, 4}}) {
        const UkEstimate uk = estimate_uk(d, k, 100000, 201, rng);
        log << " (d=" << d << ",k=" << k << ": " << fmt(uk.u_hat) << " -3SE> "
            << fmt(uk.lower_confidence) << ")";
        if (!(uk.lower_confidence > 0.0)) ok = false;
    }
    detail = "lower confidence bounds strictly positive:" + log.str();
    return ok;
}

// --------------------------------------------------------------------------
// 12. byte-identical replay of a recorded trial
// --------------------------------------------------------------------------
bool check_determinism(std::string& detail) {
    TrialSpec spec;  // d=8, k=2, n=48
    const ResultRow original = run_single_trial(spec, derive_seed(1212, 5), "acceptance12", 5);
    const ResultRow replayed =
        run_single_trial(spec, original.seed, original.experiment_id, original.trial_index);
    if (original.replay_line() != replayed.replay_line()) {
        detail = "replay mismatch:\n  " + original.replay_line() + "\n  " + replayed.replay_line();
        return false;
    }

    SweepConfig cfg;
    cfg.experiment_id = "acceptance12s";
    cfg.d = 6;
    cfg.k_list = {2};
    cfg.n_list = {14, 20};
    cfg.trials = 8;
    cfg.seed = 1212;
    cfg.workers = 4;
    const SweepResult sweep = run_sweep(cfg);
    for (std::size_t i = 0; i < sweep.rows.size(); i += 5) {
        const ResultRow& row = sweep.rows[i];
        TrialSpec row_spec;
        row_spec.d = row.d;
        row_spec.k = row.k;
        row_spec.n = row.n;
        const ResultRow replay =
            run_single_trial(row_spec, row.seed, row.experiment_id, row.trial_index);
        if (replay.replay_line() != row.replay_line()) {
            detail = "sweep row " + std::to_string(i) + " failed to replay";
            return false;
        }
    }
    detail = "single trial and sampled sweep rows replay byte-identically from recorded seeds";
    return true;
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<Check> checks = {
        {1, "closed-form exactness on line-cubature fixtures", check_cubature_exactness},
        {2, "dual-frame reconstruction identity on the symmetric basis", check_dual_frame_identity},
        {3, "uniform-subspace sampler projection moments", check_sampler_moments},
        {4, "list decoding with two erased norms", check_erasure_decoding},
        {5, "Newton/Vieta power-sum root recovery", check_newton_vieta},
        {6, "lifted recovery rate at n = 6d", check_sdp_recovery},
        {7, "recovery-rate sweep: k = 2 beats k = 1 in the transition band", check_k_sweep_trend},
        {8, "signal demo at reduced and full scale", check_signal_demo},
        {9, "l1 stability slope over two decades of noise", check_stability_slope},
        {10, "dual-certificate diagnostics", check_certificate},
        {11, "tangent-space constant u_k is positive", check_uk_positive},
        {12, "trial replay determinism", check_determinism},
    };

    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const Check& check : checks) {
        if (!selected.empty() && !selected.count(check.number)) continue;
        std::string detail;
        bool ok = false;
        try {
            ok = check.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", check.number, check.title.c_str(),
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures > 0) std::printf("%d check(s) failed\n", failures);
    return failures;
}
