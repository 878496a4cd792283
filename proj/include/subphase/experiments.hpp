#pragma once

#include "subphase/diagnostics.hpp"
#include "subphase/erasure.hpp"
#include "subphase/liftrec.hpp"
#include "subphase/system_io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace subphase {

enum class SolverKind { feasibility, trace, l1 };

inline const char* to_string(SolverKind s) {
    switch (s) {
        case SolverKind::feasibility: return "feasibility";
        case SolverKind::trace: return "trace";
        case SolverKind::l1: return "l1";
    }
    return "unknown";
}

inline SolverKind parse_solver_kind(const std::string& name) {
    if (name == "feasibility") return SolverKind::feasibility;
    if (name == "trace") return SolverKind::trace;
    if (name == "l1") return SolverKind::l1;
    throw std::invalid_argument("unknown solver '" + name + "' (feasibility|trace|l1)");
}

inline SolverResult solve(SolverKind kind, const MeasurementOperator& op, const Vector& f,
                          const SolverConfig& cfg) {
    switch (kind) {
        case SolverKind::feasibility: return solve_feasibility(op, f, cfg);
        case SolverKind::trace: return solve_trace_min(op, f, cfg);
        case SolverKind::l1: return solve_l1_robust(op, f, cfg);
    }
    throw std::logic_error("solve: unreachable");
}

/// %.17g round-trips doubles exactly and prints deterministically, which is
/// what the replay guarantee needs.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Worker pool
// ---------------------------------------------------------------------------

inline int default_worker_count() {
    if (const char* env = std::getenv("SUBPHASE_WORKERS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Runs fn(i) for i in [0, count) on a bounded pool. Tasks own their output
/// slots, so results are identical regardless of scheduling.
template <typename Fn>
inline void parallel_for(std::size_t count, int workers, Fn&& fn) {
    if (workers > static_cast<int>(count)) workers = static_cast<int>(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(body);
    for (std::thread& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Trials and result rows
// ---------------------------------------------------------------------------

/// One random-recovery trial, fully determined by (cell parameters, seed).
struct TrialSpec {
    Index d = 8;
    Index k = 2;
    Index n = 48;
    SolverKind solver = SolverKind::feasibility;
    SolverConfig solver_cfg;
    double threshold = 1e-2;  // success: min(||xh - x||, ||xh + x||) <= threshold
};

struct ResultRow {
    std::string experiment_id;
    Index d = 0, k = 0, n = 0;
    int trial_index = 0;
    std::uint64_t seed = 0;
    bool success = false;
    double signal_error = 0.0;
    double relative_residual = 0.0;
    int iterations = 0;
    double wall_ms = 0.0;

    static std::string csv_header() {
        return "experiment_id,d,k,n,trial,seed,success,signal_error,relative_residual,iterations,"
               "wall_ms";
    }

    /// The deterministic part of the row: everything except wall-clock time.
    /// Replay guarantees are stated on this serialization.
    std::string replay_line() const {
        std::string line = experiment_id;
        line += ',' + std::to_string(d) + ',' + std::to_string(k) + ',' + std::to_string(n);
        line += ',' + std::to_string(trial_index) + ',' + std::to_string(seed);
        line += success ? ",1" : ",0";
        line += ',' + format_double(signal_error) + ',' + format_double(relative_residual);
        line += ',' + std::to_string(iterations);
        return line;
    }

    std::string csv_line() const { return replay_line() + ',' + format_double(wall_ms); }
};

/// Draws a signal uniformly on the sphere and n i.i.d. uniform subspaces,
/// forms f = F_n(x x^T), solves, and scores the recovered signal. The row's
/// seed replays the trial in isolation.
inline void validate_trial_shape(Index d, Index k, Index n) {
    if (k < 1 || k >= d)
        throw std::invalid_argument("experiment: need 1 <= k < d");
    if (n < 1) throw std::invalid_argument("experiment: need n >= 1");
}

inline ResultRow run_single_trial(const TrialSpec& spec, std::uint64_t seed,
                                  const std::string& experiment_id = "trial",
                                  int trial_index = 0) {
    validate_trial_shape(spec.d, spec.k, spec.n);
    Rng rng(seed);
    const Vector x = random_unit_vector(spec.d, rng);
    std::vector<Subspace> subspaces;
    subspaces.reserve(static_cast<std::size_t>(spec.n));
    for (Index j = 0; j < spec.n; ++j)
        subspaces.push_back(Subspace::sample_uniform(spec.d, spec.k, rng));
    const MeasurementOperator op(std::move(subspaces));
    const Vector f = op.forward_rank_one(x);
    const SolverResult result = solve(spec.solver, op, f, spec.solver_cfg);

    ResultRow row;
    row.experiment_id = experiment_id;
    row.d = spec.d;
    row.k = spec.k;
    row.n = spec.n;
    row.trial_index = trial_index;
    row.seed = seed;
    row.signal_error = signed_distance(result.estimate.signal, x);
    row.success = row.signal_error <= spec.threshold;
    row.relative_residual = result.relative_residual;
    row.iterations = result.iterations;
    row.wall_ms = result.wall_ms;
    return row;
}

// ---------------------------------------------------------------------------
// Recovery-rate sweep
// ---------------------------------------------------------------------------

struct SweepConfig {
    std::string experiment_id = "sweep";
    Index d = 8;
    std::vector<Index> k_list;  // defaults to 1..d/2
    std::vector<Index> n_list;  // defaults to 2*k_min .. 8d in steps of 4
    int trials = 200;           // desk-scale default; the reference studies used 1000
    std::uint64_t seed = 1;
    double threshold = 1e-2;
    SolverKind solver = SolverKind::feasibility;
    SolverConfig solver_cfg;
    int workers = 0;  // 0 = default_worker_count()
};

struct SweepCell {
    Index d = 0, k = 0, n = 0;
    int trials = 0;
    int successes = 0;
    double rate = 0.0;
    double standard_error = 0.0;
    std::uint64_t seed = 0;  // master seed; per-trial seeds derive from it
};

struct SweepResult {
    SweepConfig config;
    std::vector<SweepCell> cells;
    std::vector<ResultRow> rows;  // canonical (cell, trial) order
};

inline void validate_sweep_config(const SweepConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
    if (!(cfg.threshold > 0.0)) throw std::invalid_argument("sweep: threshold must be > 0");
    if (cfg.k_list.empty() || cfg.n_list.empty())
        throw std::invalid_argument("sweep: empty k or n grid");
    for (Index k : cfg.k_list) {
        if (k < 1 || k >= cfg.d) throw std::invalid_argument("sweep: need 1 <= k < d");
        if (2 * k > cfg.d)
            throw std::invalid_argument(
                "sweep: k <= d/2 required (complementary subspaces carry the same information)");
    }
    for (Index n : cfg.n_list)
        if (n < 0) throw std::invalid_argument("sweep: n must be >= 0");
}

inline SweepResult run_sweep(SweepConfig cfg) {
    if (cfg.k_list.empty())
        for (Index k = 1; 2 * k <= cfg.d; ++k) cfg.k_list.push_back(k);
    if (cfg.n_list.empty()) {
        const Index kmin = *std::min_element(cfg.k_list.begin(), cfg.k_list.end());
        for (Index n = 2 * kmin; n <= 8 * cfg.d; n += 4) cfg.n_list.push_back(n);
    }
    validate_sweep_config(cfg);

    SweepResult out;
    out.config = cfg;

    struct CellRef {
        Index k, n;
    };
    std::vector<CellRef> cells;
    for (Index k : cfg.k_list)
        for (Index n : cfg.n_list) cells.push_back({k, n});

    out.cells.resize(cells.size());
    out.rows.resize(cells.size() * static_cast<std::size_t>(cfg.trials));

    const int workers = cfg.workers > 0 ? cfg.workers : default_worker_count();
    parallel_for(out.rows.size(), workers, [&](std::size_t task) {
        const std::size_t ci = task / static_cast<std::size_t>(cfg.trials);
        const int trial = static_cast<int>(task % static_cast<std::size_t>(cfg.trials));
        const CellRef& cell = cells[ci];
        const std::uint64_t seed = derive_seed(cfg.seed, ci, static_cast<std::uint64_t>(trial));
        ResultRow& row = out.rows[task];
        if (cell.n == 0) {
            // no measurements: counted as failure, no solve attempted
            row.experiment_id = cfg.experiment_id;
            row.d = cfg.d;
            row.k = cell.k;
            row.n = 0;
            row.trial_index = trial;
            row.seed = seed;
            row.success = false;
            row.signal_error = std::numeric_limits<double>::infinity();
            return;
        }
        TrialSpec spec;
        spec.d = cfg.d;
        spec.k = cell.k;
        spec.n = cell.n;
        spec.solver = cfg.solver;
        spec.solver_cfg = cfg.solver_cfg;
        spec.threshold = cfg.threshold;
        row = run_single_trial(spec, seed, cfg.experiment_id, trial);
    });

    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        SweepCell& cell = out.cells[ci];
        cell.d = cfg.d;
        cell.k = cells[ci].k;
        cell.n = cells[ci].n;
        cell.trials = cfg.trials;
        cell.seed = cfg.seed;
        for (int t = 0; t < cfg.trials; ++t)
            if (out.rows[ci * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t)]
                    .success)
                ++cell.successes;
        cell.rate = static_cast<double>(cell.successes) / static_cast<double>(cell.trials);
        cell.standard_error =
            std::sqrt(cell.rate * (1.0 - cell.rate) / static_cast<double>(cell.trials));
    }
    return out;
}

inline void write_sweep_csv(const std::string& path, const SweepResult& result) {
    std::ofstream out(path);
    if (!out) throw IoError("write_sweep_csv: cannot open '" + path + "'");
    out << "experiment_id,d,k,n,trials,successes,rate,se,seed,solver,threshold\n";
    for (const SweepCell& c : result.cells) {
        out << result.config.experiment_id << ',' << c.d << ',' << c.k << ',' << c.n << ','
            << c.trials << ',' << c.successes << ',' << format_double(c.rate) << ','
            << format_double(c.standard_error) << ',' << c.seed << ','
            << to_string(result.config.solver) << ',' << format_double(result.config.threshold)
            << "\n";
    }
    if (!out) throw IoError("write_sweep_csv: write to '" + path + "' failed");
}

inline void write_rows_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("write_rows_csv: cannot open '" + path + "'");
    out << ResultRow::csv_header() << "\n";
    for (const ResultRow& row : rows) out << row.csv_line() << "\n";
    if (!out) throw IoError("write_rows_csv: write to '" + path + "' failed");
}

/// Sidecar metadata: configuration echo plus notes where the defaults
/// diverge from the reference experimental protocol.
inline nlohmann::json sweep_metadata(const SweepResult& result) {
    const SweepConfig& cfg = result.config;
    nlohmann::json meta;
    meta["experiment_id"] = cfg.experiment_id;
    meta["d"] = cfg.d;
    meta["k_list"] = cfg.k_list;
    meta["n_list"] = cfg.n_list;
    meta["trials"] = cfg.trials;
    meta["seed"] = cfg.seed;
    meta["threshold"] = cfg.threshold;
    meta["solver"] = to_string(cfg.solver);
    meta["notes"] = {"n grid defaults to 2*k_min..8d (step 4); pass --n-list to override",
                     "trials default 200 for desk-scale runtime; reference studies used 1000"};
    return meta;
}

// ---------------------------------------------------------------------------
// Signal demo (exact fixture path and random SDP path)
// ---------------------------------------------------------------------------

struct DemoRecord {
    std::string kind;
    Index d = 0, k = 0, n = 0;
    std::uint64_t seed = 0;
    double signal_error = 0.0;
    double rank1_residual = 0.0;
    std::string status = "converged";
    int iterations = 0;
    double relative_residual = 0.0;
    double wall_ms = 0.0;
    bool gram_regularized = false;
    Vector original;
    Vector recovered;

    nlohmann::json to_json(bool include_signals) const {
        nlohmann::json j;
        j["kind"] = kind;
        j["d"] = d;
        j["k"] = k;
        j["n"] = n;
        j["seed"] = seed;
        j["signal_error"] = signal_error;
        j["rank1_residual"] = rank1_residual;
        j["status"] = status;
        j["iterations"] = iterations;
        j["relative_residual"] = relative_residual;
        j["wall_ms"] = wall_ms;
        j["gram_regularized"] = gram_regularized;
        if (include_signals) {
            j["original"] = std::vector<double>(original.data(), original.data() + original.size());
            j["recovered"] =
                std::vector<double>(recovered.data(), recovered.data() + recovered.size());
        }
        return j;
    }
};

/// Closed-form demo on a (verified) cubature system.
inline DemoRecord run_exact_demo(const SubspaceSystem& sys, std::uint64_t seed) {
    Rng rng(seed);
    const Vector x = random_unit_vector(sys.ambient_dim(), rng);
    const detail::WallTimer timer;
    const SymMat xhat = reconstruct_rank_one(sys, measure(sys, x));
    const SignalEstimate est = extract_signal(xhat);

    DemoRecord rec;
    rec.kind = "exact-demo";
    rec.d = sys.ambient_dim();
    rec.k = sys.sub_dim();
    rec.n = sys.size();
    rec.seed = seed;
    rec.signal_error = signed_distance(est.signal, x);
    rec.rank1_residual = est.rank1_residual;
    rec.wall_ms = timer.elapsed_ms();
    rec.original = x;
    rec.recovered = est.signal;
    return rec;
}

/// Random-subspace demo solved through the lifted program.
inline DemoRecord run_sdp_demo(Index d, Index k, Index n, SolverKind kind, const SolverConfig& cfg,
                               std::uint64_t seed) {
    validate_trial_shape(d, k, n);
    Rng rng(seed);
    const Vector x = random_unit_vector(d, rng);
    std::vector<Subspace> subspaces;
    subspaces.reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) subspaces.push_back(Subspace::sample_uniform(d, k, rng));
    const MeasurementOperator op(std::move(subspaces));
    const SolverResult result = solve(kind, op, op.forward_rank_one(x), cfg);

    DemoRecord rec;
    rec.kind = "sdp-demo";
    rec.d = d;
    rec.k = k;
    rec.n = n;
    rec.seed = seed;
    rec.signal_error = signed_distance(result.estimate.signal, x);
    rec.rank1_residual = result.estimate.rank1_residual;
    rec.status = to_string(result.status);
    rec.iterations = result.iterations;
    rec.relative_residual = result.relative_residual;
    rec.wall_ms = result.wall_ms;
    rec.gram_regularized = op.regularized();
    rec.original = x;
    rec.recovered = result.estimate.signal;
    return rec;
}

// ---------------------------------------------------------------------------
// Stability sweep (noisy measurements, l1 recovery)
// ---------------------------------------------------------------------------

enum class NoiseKind { gaussian, spike };

inline const char* to_string(NoiseKind k) {
    return k == NoiseKind::gaussian ? "gaussian" : "spike";
}

inline NoiseKind parse_noise_kind(const std::string& name) {
    if (name == "gaussian") return NoiseKind::gaussian;
    if (name == "spike") return NoiseKind::spike;
    throw std::invalid_argument("unknown noise kind '" + name + "' (gaussian|spike)");
}

struct StabilityConfig {
    std::string experiment_id = "stability";
    Index d = 8;
    Index k = 2;
    Index n = 64;
    std::vector<double> noise_l1_levels = {1e-2, 10.0 / 316.0, 1e-1, 100.0 / 316.0, 1.0};
    int trials = 50;
    std::uint64_t seed = 1;
    NoiseKind noise = NoiseKind::gaussian;
    SolverConfig solver_cfg;
    int workers = 0;
};

struct StabilityRow {
    double noise_l1 = 0.0;
    int trial_index = 0;
    std::uint64_t seed = 0;
    double frobenius_error = 0.0;  // ||Xhat - x x^T||_F
    double signal_error = 0.0;
    int iterations = 0;
};

struct StabilityResult {
    StabilityConfig config;
    std::vector<StabilityRow> rows;
    std::vector<double> median_frobenius;  // per noise level
    double loglog_slope = 0.0;  // of median error vs ||omega||_1 / n
};

/// Noise vector with the prescribed l1 norm, added to the raw squared norms
/// before the d/k measurement scaling.
inline Vector make_noise(NoiseKind kind, Index n, double l1_target, Rng& rng) {
    if (l1_target <= 0.0) return Vector::Zero(n);
    if (kind == NoiseKind::spike) {
        Vector omega = Vector::Zero(n);
        const Index pos = static_cast<Index>(rng() % static_cast<std::uint64_t>(n));
        omega(pos) = (rng() & 1ULL) ? l1_target : -l1_target;
        return omega;
    }
    Vector omega = gaussian_vector(n, rng);
    const double l1 = omega.lpNorm<1>();
    return omega * (l1_target / l1);
}

inline double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t m = xs.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) continue;
        const double lx = std::log10(xs[i]);
        const double ly = std::log10(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++used;
    }
    if (used < 2) return 0.0;
    const double um = static_cast<double>(used);
    return (um * sxy - sx * sy) / (um * sxx - sx * sx);
}

inline StabilityResult run_stability(const StabilityConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("stability: trials must be >= 1");
    validate_trial_shape(cfg.d, cfg.k, cfg.n);
    if (cfg.noise_l1_levels.empty())
        throw std::invalid_argument("stability: noise level list is empty");

    StabilityResult out;
    out.config = cfg;
    out.rows.resize(cfg.noise_l1_levels.size() * static_cast<std::size_t>(cfg.trials));

    const int workers = cfg.workers > 0 ? cfg.workers : default_worker_count();
    parallel_for(out.rows.size(), workers, [&](std::size_t task) {
        const std::size_t li = task / static_cast<std::size_t>(cfg.trials);
        const int trial = static_cast<int>(task % static_cast<std::size_t>(cfg.trials));
        const double level = cfg.noise_l1_levels[li];
        const std::uint64_t seed = derive_seed(cfg.seed, li, static_cast<std::uint64_t>(trial));

        Rng rng(seed);
        const Vector x = random_unit_vector(cfg.d, rng);
        std::vector<Subspace> subspaces;
        subspaces.reserve(static_cast<std::size_t>(cfg.n));
        for (Index j = 0; j < cfg.n; ++j)
            subspaces.push_back(Subspace::sample_uniform(cfg.d, cfg.k, rng));
        const MeasurementOperator op(std::move(subspaces));
        const Vector omega = make_noise(cfg.noise, cfg.n, level, rng);
        const Vector f = op.forward_rank_one(x) + op.scale() * omega;
        const SolverResult result = solve_l1_robust(op, f, cfg.solver_cfg);

        StabilityRow row;
        row.noise_l1 = level;
        row.trial_index = trial;
        row.seed = seed;
        row.frobenius_error = (result.x_hat - SymMat::outer(x)).frobenius_norm();
        row.signal_error = signed_distance(result.estimate.signal, x);
        row.iterations = result.iterations;
        out.rows[task] = row;
    });

    out.median_frobenius.resize(cfg.noise_l1_levels.size());
    std::vector<double> xs, ys;
    for (std::size_t li = 0; li < cfg.noise_l1_levels.size(); ++li) {
        std::vector<double> errors;
        errors.reserve(static_cast<std::size_t>(cfg.trials));
        for (int t = 0; t < cfg.trials; ++t)
            errors.push_back(
                out.rows[li * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t)]
                    .frobenius_error);
        std::sort(errors.begin(), errors.end());
        const std::size_t mid = errors.size() / 2;
        out.median_frobenius[li] = errors.size() % 2 == 1
                                       ? errors[mid]
                                       : 0.5 * (errors[mid - 1] + errors[mid]);
        xs.push_back(cfg.noise_l1_levels[li] / static_cast<double>(cfg.n));
        ys.push_back(out.median_frobenius[li]);
    }
    out.loglog_slope = fit_loglog_slope(xs, ys);
    return out;
}

inline void write_stability_csv(const std::string& path, const StabilityResult& result) {
    std::ofstream out(path);
    if (!out) throw IoError("write_stability_csv: cannot open '" + path + "'");
    out << "experiment_id,d,k,n,noise_kind,noise_l1,trial,seed,frobenius_error,signal_error,"
           "iterations\n";
    for (const StabilityRow& r : result.rows) {
        out << result.config.experiment_id << ',' << result.config.d << ',' << result.config.k
            << ',' << result.config.n << ',' << to_string(result.config.noise) << ','
            << format_double(r.noise_l1) << ',' << r.trial_index << ',' << r.seed << ','
            << format_double(r.frobenius_error) << ',' << format_double(r.signal_error) << ','
            << r.iterations << "\n";
    }
    if (!out) throw IoError("write_stability_csv: write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Certificate experiment
// ---------------------------------------------------------------------------

struct CertificateExperimentConfig {
    std::string experiment_id = "certificate";
    Index d = 16;
    Index k = 2;
    Index n = 160;
    double beta_gamma = 2.0;
    double gamma = 0.5;  // threshold on ||Y_T||_1
    int trials = 100;
    std::uint64_t seed = 1;
    int workers = 0;
};

struct CertificateTrialRow {
    int trial_index = 0;
    std::uint64_t seed = 0;
    double tangent_nuclear = 0.0;
    double normal_min_eig = 0.0;
    double delta_best = 0.0;
    double delta_gap = 0.0;
    double alpha = 0.0;
    int truncated_count = 0;
    bool condition_c = false;
};

struct CertificateExperimentResult {
    CertificateExperimentConfig config;
    std::vector<CertificateTrialRow> rows;
    int condition_c_count = 0;
};

inline CertificateExperimentResult run_certificate_experiment(
    const CertificateExperimentConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("certificate: trials must be >= 1");
    validate_trial_shape(cfg.d, cfg.k, cfg.n);
    CertificateExperimentResult out;
    out.config = cfg;
    out.rows.resize(static_cast<std::size_t>(cfg.trials));

    const int workers = cfg.workers > 0 ? cfg.workers : default_worker_count();
    parallel_for(out.rows.size(), workers, [&](std::size_t task) {
        const std::uint64_t seed = derive_seed(cfg.seed, task);
        Rng rng(seed);
        const Vector x = random_unit_vector(cfg.d, rng);
        std::vector<Subspace> subspaces;
        subspaces.reserve(static_cast<std::size_t>(cfg.n));
        for (Index j = 0; j < cfg.n; ++j)
            subspaces.push_back(Subspace::sample_uniform(cfg.d, cfg.k, rng));
        const CertificateReport report = build_certificate(subspaces, x, cfg.beta_gamma);

        CertificateTrialRow row;
        row.trial_index = static_cast<int>(task);
        row.seed = seed;
        row.tangent_nuclear = report.tangent_nuclear;
        row.normal_min_eig = report.normal_min_eig;
        row.delta_best = report.delta_best;
        row.delta_gap = report.delta_gap;
        row.alpha = report.alpha;
        for (std::uint8_t t : report.truncated) row.truncated_count += t;
        row.condition_c = report.condition_c_holds(cfg.gamma);
        out.rows[task] = row;
    });

    for (const CertificateTrialRow& row : out.rows)
        if (row.condition_c) ++out.condition_c_count;
    return out;
}

inline nlohmann::json certificate_to_json(const CertificateExperimentResult& result) {
    nlohmann::json trials = nlohmann::json::array();
    for (const CertificateTrialRow& row : result.rows) {
        trials.push_back({{"trial", row.trial_index},
                          {"seed", row.seed},
                          {"tangent_nuclear", row.tangent_nuclear},
                          {"normal_min_eig", row.normal_min_eig},
                          {"delta_best", row.delta_best},
                          {"delta_gap", row.delta_gap},
                          {"alpha", row.alpha},
                          {"truncated_count", row.truncated_count},
                          {"condition_c", row.condition_c}});
    }
    const CertificateExperimentConfig& cfg = result.config;
    return nlohmann::json{{"experiment_id", cfg.experiment_id},
                          {"d", cfg.d},
                          {"k", cfg.k},
                          {"n", cfg.n},
                          {"beta_gamma", cfg.beta_gamma},
                          {"gamma", cfg.gamma},
                          {"trials", cfg.trials},
                          {"seed", cfg.seed},
                          {"condition_c_count", result.condition_c_count},
                          {"records", std::move(trials)}};
}

} // namespace subphase
