// Command-line front end: sampling and verifying subspace systems, running
// the closed-form and lifted reconstructions, and driving the experiment
// suites (sweep, stability, certificate).
//
// Exit codes: 0 success, 2 validation error, 3 solver failure, 4 I/O error.

#include "subphase/subphase.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace subphase;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

/// Values from --config override the corresponding flags.
class ConfigOverride {
public:
    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("config: cannot open '" + path + "'");
        try {
            doc_ = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw IoError("config: '" + path + "': " + e.what());
        }
    }

    template <typename T>
    void apply(const char* key, T& value) const {
        if (doc_.contains(key)) value = doc_.at(key).get<T>();
    }

private:
    nlohmann::json doc_;
};

struct CommonOptions {
    Index d = 8;
    Index k = 2;
    Index n = 48;
    int trials = 200;
    std::uint64_t seed = 1;
    double threshold = 1e-2;
    std::string solver = "feasibility";
    std::string out;
    std::string config;
    double tol = 1e-7;
    int max_iters = 5000;
    int workers = 0;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--d", opt.d, "ambient dimension");
    cmd->add_option("--k", opt.k, "subspace dimension");
    cmd->add_option("--n", opt.n, "number of subspaces");
    cmd->add_option("--trials", opt.trials, "trial count");
    cmd->add_option("--seed", opt.seed, "master seed (recorded in all outputs)");
    cmd->add_option("--threshold", opt.threshold, "success threshold on the signal error");
    cmd->add_option("--solver", opt.solver, "feasibility|trace|l1");
    cmd->add_option("--out", opt.out, "output path");
    cmd->add_option("--config", opt.config, "JSON config file; overrides flags");
    cmd->add_option("--tol", opt.tol, "solver tolerance");
    cmd->add_option("--max-iters", opt.max_iters, "solver iteration cap");
    cmd->add_option("--workers", opt.workers, "worker threads (default: SUBPHASE_WORKERS or cores)");
}

ConfigOverride make_override(CommonOptions& opt) {
    ConfigOverride ov;
    if (!opt.config.empty()) {
        ov.load(opt.config);
        ov.apply("d", opt.d);
        ov.apply("k", opt.k);
        ov.apply("n", opt.n);
        ov.apply("trials", opt.trials);
        ov.apply("seed", opt.seed);
        ov.apply("threshold", opt.threshold);
        ov.apply("solver", opt.solver);
        ov.apply("out", opt.out);
        ov.apply("tol", opt.tol);
        ov.apply("max_iters", opt.max_iters);
        ov.apply("workers", opt.workers);
    }
    return ov;
}

SolverConfig solver_config(const CommonOptions& opt) {
    SolverConfig cfg;
    cfg.tol = opt.tol;
    cfg.max_iters = opt.max_iters;
    return cfg;
}

void require_writable(const std::string& path) {
    std::ofstream probe(path, std::ios::app);
    if (!probe) throw IoError("output path '" + path + "' is not writable");
}

void emit(const nlohmann::json& j, const std::string& out_path) {
    std::cout << j.dump(2) << "\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot open '" + out_path + "'");
        out << j.dump(2) << "\n";
    }
}

SubspaceSystem load_or_default_system(const std::string& path) {
    if (!path.empty()) return read_subspace_system(path);
    return equiangular_line_system(5);  // shipped reference cubature
}

std::vector<Index> parse_index_list(const std::string& csv) {
    std::vector<Index> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string tok = csv.substr(pos, comma == std::string::npos ? csv.npos : comma - pos);
        if (!tok.empty()) out.push_back(static_cast<Index>(std::stol(tok)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string tok = csv.substr(pos, comma == std::string::npos ? csv.npos : comma - pos);
        if (!tok.empty()) out.push_back(std::stod(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------

int cmd_sample(CommonOptions& opt) {
    make_override(opt);
    if (opt.out.empty()) throw std::invalid_argument("sample: --out is required");
    Rng rng(opt.seed);
    std::vector<Subspace> subs;
    subs.reserve(static_cast<std::size_t>(opt.n));
    for (Index j = 0; j < opt.n; ++j) subs.push_back(Subspace::sample_uniform(opt.d, opt.k, rng));
    const SubspaceSystem sys = SubspaceSystem::equal_weights(std::move(subs));
    write_subspace_system(opt.out, sys);
    emit({{"command", "sample"},
          {"d", opt.d},
          {"k", opt.k},
          {"n", opt.n},
          {"seed", opt.seed},
          {"written", opt.out}},
         "");
    return kExitOk;
}

int cmd_verify(CommonOptions& opt, std::string& system_path, int p_max, int probes, double tol) {
    const ConfigOverride ov = make_override(opt);
    ov.apply("system", system_path);
    ov.apply("p", p_max);
    ov.apply("probes", probes);
    ov.apply("verify_tol", tol);

    const SubspaceSystem sys = load_or_default_system(system_path);
    Rng rng(opt.seed);
    const FrameReport report = frame_report(sys, p_max, probes, tol, rng);

    nlohmann::json per_l = nlohmann::json::array();
    for (int l = 1; l <= report.tightness.p; ++l)
        per_l.push_back({{"l", l},
                         {"bound", report.tightness.bound[static_cast<std::size_t>(l - 1)]},
                         {"max_deviation",
                          report.tightness.max_deviation[static_cast<std::size_t>(l - 1)]}});
    nlohmann::json j{{"command", "verify"},
                     {"d", sys.ambient_dim()},
                     {"k", sys.sub_dim()},
                     {"n", sys.size()},
                     {"normalized", sys.is_normalized()},
                     {"frame_lower", report.bounds.lower},
                     {"frame_upper", report.bounds.upper},
                     {"tightness_ratio", report.tightness_ratio},
                     {"tight_up_to_p", report.tightness.tight},
                     {"per_l", std::move(per_l)},
                     {"seed", opt.seed},
                     {"tol", tol}};
    if (report.cubature_checked) {
        j["cubature4"] = report.cubature.is_cubature;
        j["cubature4_max_deviation"] = report.cubature.max_deviation;
    }
    emit(j, opt.out);
    return kExitOk;
}

int cmd_exact(CommonOptions& opt, std::string& system_path, bool no_verify, bool signals) {
    const ConfigOverride ov = make_override(opt);
    ov.apply("system", system_path);

    const SubspaceSystem sys = load_or_default_system(system_path);
    if (!no_verify) {
        const CubatureCheck check = verify_cubature4(sys);
        if (!check.is_cubature)
            throw std::invalid_argument(
                "exact: system is not a strength-4 cubature (max deviation " +
                format_double(check.max_deviation) + "); pass --no-verify to force");
    }
    const DemoRecord rec = run_exact_demo(sys, opt.seed);
    emit(rec.to_json(signals), opt.out);
    return kExitOk;
}

int cmd_decode_erasure(CommonOptions& opt, std::string& system_path, int erasures,
                       std::string& positions_csv, bool no_verify) {
    const ConfigOverride ov = make_override(opt);
    ov.apply("system", system_path);
    ov.apply("erasures", erasures);
    ov.apply("positions", positions_csv);

    const SubspaceSystem sys = load_or_default_system(system_path);
    Rng rng(opt.seed);

    std::vector<Index> positions = parse_index_list(positions_csv);
    if (positions.empty()) {
        if (erasures < 0 || erasures >= sys.size())
            throw std::invalid_argument("decode-erasure: need 0 <= erasures < n");
        while (static_cast<int>(positions.size()) < erasures) {
            const Index candidate = static_cast<Index>(rng() % static_cast<std::uint64_t>(sys.size()));
            if (std::find(positions.begin(), positions.end(), candidate) == positions.end())
                positions.push_back(candidate);
        }
        std::sort(positions.begin(), positions.end());
    }

    if (!no_verify) {
        const int p = static_cast<int>(positions.size());
        const CubatureCheck cub = verify_cubature4(sys);
        const TightnessReport tight =
            verify_p_fusion_tight(sys, std::max(p, 1), 100, kVerifierDefaultTol, rng);
        if (!cub.is_cubature || !tight.tight)
            throw std::invalid_argument(
                "decode-erasure: system failed the cubature/tightness verification; "
                "pass --no-verify to force");
    }

    const Vector x = random_unit_vector(sys.ambient_dim(), rng);
    const Measurements m = erase(measure(sys, x), positions);
    const CandidateList list = list_decode(sys, m);

    nlohmann::json entries = nlohmann::json::array();
    double best_error = std::numeric_limits<double>::infinity();
    for (const Candidate& c : list.entries) {
        const double err = (c.signal - x).norm();
        best_error = std::min(best_error, err);
        entries.push_back({{"rank1_residual", c.rank1_residual},
                           {"root_index", c.root_index},
                           {"error_to_truth", err},
                           {"erased_values",
                            std::vector<double>(c.erased_values.data(),
                                                c.erased_values.data() + c.erased_values.size())}});
    }
    emit({{"command", "decode-erasure"},
          {"d", sys.ambient_dim()},
          {"k", sys.sub_dim()},
          {"n", sys.size()},
          {"seed", opt.seed},
          {"positions", positions},
          {"list_size", list.size()},
          {"best_error_to_truth", best_error},
          {"diagnostics",
           {{"root_tuples", list.diagnostics.root_tuples},
            {"complex_rejected", list.diagnostics.complex_rejected},
            {"range_rejected", list.diagnostics.range_rejected},
            {"consistency_rejected", list.diagnostics.consistency_rejected},
            {"rank_rejected", list.diagnostics.rank_rejected}}},
          {"entries", std::move(entries)}},
         opt.out);
    return kExitOk;
}

int cmd_recover(CommonOptions& opt, double noise_l1, std::string& noise_kind, bool signals) {
    const ConfigOverride ov = make_override(opt);
    ov.apply("noise_l1", noise_l1);
    ov.apply("noise_kind", noise_kind);

    const SolverKind kind = parse_solver_kind(opt.solver);
    DemoRecord rec;
    if (noise_l1 > 0.0) {
        Rng rng(opt.seed);
        const Vector x = random_unit_vector(opt.d, rng);
        std::vector<Subspace> subs;
        subs.reserve(static_cast<std::size_t>(opt.n));
        for (Index j = 0; j < opt.n; ++j)
            subs.push_back(Subspace::sample_uniform(opt.d, opt.k, rng));
        const MeasurementOperator op(std::move(subs));
        const Vector omega = make_noise(parse_noise_kind(noise_kind), opt.n, noise_l1, rng);
        const Vector f = op.forward_rank_one(x) + op.scale() * omega;
        const SolverResult result = solve(kind, op, f, solver_config(opt));
        rec.kind = "recover";
        rec.d = opt.d;
        rec.k = opt.k;
        rec.n = opt.n;
        rec.seed = opt.seed;
        rec.signal_error = signed_distance(result.estimate.signal, x);
        rec.rank1_residual = result.estimate.rank1_residual;
        rec.status = to_string(result.status);
        rec.iterations = result.iterations;
        rec.relative_residual = result.relative_residual;
        rec.wall_ms = result.wall_ms;
        rec.gram_regularized = op.regularized();
        rec.original = x;
        rec.recovered = result.estimate.signal;
    } else {
        rec = run_sdp_demo(opt.d, opt.k, opt.n, kind, solver_config(opt), opt.seed);
        rec.kind = "recover";
    }
    nlohmann::json j = rec.to_json(signals);
    j["noise_l1"] = noise_l1;
    j["solver"] = opt.solver;
    j["success"] = rec.signal_error <= opt.threshold;
    emit(j, opt.out);
    return rec.status == "converged" ? kExitOk : kExitSolver;
}

int cmd_sweep(CommonOptions& opt, std::string& k_list_csv, std::string& n_list_csv,
              std::string& rows_path) {
    const ConfigOverride ov = make_override(opt);
    ov.apply("k_list", k_list_csv);
    ov.apply("n_list", n_list_csv);
    ov.apply("rows", rows_path);

    SweepConfig cfg;
    cfg.experiment_id = "sweep";
    cfg.d = opt.d;
    cfg.k_list = parse_index_list(k_list_csv);
    cfg.n_list = parse_index_list(n_list_csv);
    cfg.trials = opt.trials;
    cfg.seed = opt.seed;
    cfg.threshold = opt.threshold;
    cfg.solver = parse_solver_kind(opt.solver);
    cfg.solver_cfg = solver_config(opt);
    cfg.workers = opt.workers;

    if (opt.out.empty()) throw std::invalid_argument("sweep: --out is required");
    require_writable(opt.out);
    if (!rows_path.empty()) require_writable(rows_path);

    const SweepResult result = run_sweep(cfg);
    write_sweep_csv(opt.out, result);
    if (!rows_path.empty()) write_rows_csv(rows_path, result.rows);

    nlohmann::json meta = sweep_metadata(result);
    std::ofstream meta_out(opt.out + ".meta.json");
    if (meta_out) meta_out << meta.dump(2) << "\n";
    std::cout << meta.dump(2) << "\n";
    return kExitOk;
}

int cmd_stability(CommonOptions& opt, std::string& noise_list_csv, std::string& noise_kind) {
    const ConfigOverride ov = make_override(opt);
    ov.apply("noise_list", noise_list_csv);
    ov.apply("noise_kind", noise_kind);

    StabilityConfig cfg;
    cfg.d = opt.d;
    cfg.k = opt.k;
    cfg.n = opt.n;
    if (!noise_list_csv.empty()) cfg.noise_l1_levels = parse_double_list(noise_list_csv);
    cfg.trials = opt.trials;
    cfg.seed = opt.seed;
    cfg.noise = parse_noise_kind(noise_kind);
    cfg.solver_cfg = solver_config(opt);
    cfg.workers = opt.workers;

    if (!opt.out.empty()) require_writable(opt.out);
    const StabilityResult result = run_stability(cfg);
    if (!opt.out.empty()) write_stability_csv(opt.out, result);

    nlohmann::json medians = nlohmann::json::array();
    for (std::size_t i = 0; i < cfg.noise_l1_levels.size(); ++i)
        medians.push_back(
            {{"noise_l1", cfg.noise_l1_levels[i]}, {"median_frobenius", result.median_frobenius[i]}});
    emit({{"command", "stability"},
          {"d", cfg.d},
          {"k", cfg.k},
          {"n", cfg.n},
          {"trials", cfg.trials},
          {"seed", cfg.seed},
          {"noise_kind", to_string(cfg.noise)},
          {"loglog_slope", result.loglog_slope},
          {"medians", std::move(medians)}},
         "");
    return kExitOk;
}

int cmd_certificate(CommonOptions& opt, double beta, double gamma) {
    const ConfigOverride ov = make_override(opt);
    ov.apply("beta", beta);
    ov.apply("gamma", gamma);

    CertificateExperimentConfig cfg;
    cfg.d = opt.d;
    cfg.k = opt.k;
    cfg.n = opt.n;
    cfg.beta_gamma = beta;
    cfg.gamma = gamma;
    cfg.trials = opt.trials;
    cfg.seed = opt.seed;
    cfg.workers = opt.workers;
    const CertificateExperimentResult result = run_certificate_experiment(cfg);

    double mean_nuclear = 0.0, mean_min_eig = 0.0;
    for (const CertificateTrialRow& row : result.rows) {
        mean_nuclear += row.tangent_nuclear;
        mean_min_eig += row.normal_min_eig;
    }
    mean_nuclear /= static_cast<double>(cfg.trials);
    mean_min_eig /= static_cast<double>(cfg.trials);

    nlohmann::json summary{{"command", "certificate"},
                           {"d", cfg.d},
                           {"k", cfg.k},
                           {"n", cfg.n},
                           {"beta_gamma", cfg.beta_gamma},
                           {"gamma", cfg.gamma},
                           {"trials", cfg.trials},
                           {"seed", cfg.seed},
                           {"condition_c_count", result.condition_c_count},
                           {"mean_tangent_nuclear", mean_nuclear},
                           {"mean_normal_min_eig", mean_min_eig}};
    std::cout << summary.dump(2) << "\n";
    if (!opt.out.empty()) {
        std::ofstream out(opt.out);
        if (!out) throw IoError("cannot open '" + opt.out + "'");
        out << certificate_to_json(result).dump(2) << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"signal reconstruction from squared norms of subspace projections"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::string system_path, k_list_csv, n_list_csv, rows_path, positions_csv;
    std::string noise_kind = "gaussian", noise_list_csv;
    int erasures = 2, p_max = 2, probes = 200;
    double verify_tol = kVerifierDefaultTol, noise_l1 = 0.0, beta = 2.0, gamma = 0.5;
    bool no_verify = false, signals = false;

    CLI::App* sample = app.add_subcommand("sample", "draw a uniform random subspace system");
    add_common_flags(sample, opt);

    CLI::App* verify = app.add_subcommand("verify", "frame bounds, tightness, cubature verdict");
    add_common_flags(verify, opt);
    verify->add_option("--system", system_path, "subspace system JSON (default: 5-line fixture)");
    verify->add_option("--p", p_max, "largest tightness order to probe");
    verify->add_option("--probes", probes, "random probe count");
    verify->add_option("--verify-tol", verify_tol, "verifier tolerance");

    CLI::App* exact = app.add_subcommand("exact", "closed-form reconstruction demo on a cubature");
    add_common_flags(exact, opt);
    exact->add_option("--system", system_path, "subspace system JSON (default: 5-line fixture)");
    exact->add_flag("--no-verify", no_verify, "skip the cubature verification");
    exact->add_flag("--signals", signals, "embed original/recovered vectors in the record");

    CLI::App* decode = app.add_subcommand("decode-erasure", "list-decode with erased norms");
    add_common_flags(decode, opt);
    decode->add_option("--system", system_path, "subspace system JSON (default: 5-line fixture)");
    decode->add_option("--erasures", erasures, "number of erased positions (chosen by seed)");
    decode->add_option("--positions", positions_csv, "explicit erased positions, comma separated");
    decode->add_flag("--no-verify", no_verify, "skip cubature/tightness verification");

    CLI::App* recover = app.add_subcommand("recover", "random-subspace recovery via the lifted program");
    add_common_flags(recover, opt);
    recover->add_option("--noise-l1", noise_l1, "l1 norm of measurement noise");
    recover->add_option("--noise-kind", noise_kind, "gaussian|spike");
    recover->add_flag("--signals", signals, "embed original/recovered vectors in the record");

    CLI::App* sweep = app.add_subcommand("sweep", "recovery-rate sweep over (k, n) cells");
    add_common_flags(sweep, opt);
    sweep->add_option("--k-list", k_list_csv, "k values, comma separated (default 1..d/2)");
    sweep->add_option("--n-list", n_list_csv, "n values, comma separated (default 2k..8d)");
    sweep->add_option("--rows", rows_path, "also write per-trial rows CSV");

    CLI::App* stability = app.add_subcommand("stability", "noisy-recovery error vs noise level");
    add_common_flags(stability, opt);
    stability->add_option("--noise-list", noise_list_csv, "noise l1 levels, comma separated");
    stability->add_option("--noise-kind", noise_kind, "gaussian|spike");

    CLI::App* certificate = app.add_subcommand("certificate", "dual-certificate diagnostics");
    add_common_flags(certificate, opt);
    certificate->add_option("--beta", beta, "truncation parameter beta_gamma");
    certificate->add_option("--gamma", gamma, "threshold on the tangent nuclear norm");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (sample->parsed()) return cmd_sample(opt);
        if (verify->parsed()) return cmd_verify(opt, system_path, p_max, probes, verify_tol);
        if (exact->parsed()) return cmd_exact(opt, system_path, no_verify, signals);
        if (decode->parsed())
            return cmd_decode_erasure(opt, system_path, erasures, positions_csv, no_verify);
        if (recover->parsed()) return cmd_recover(opt, noise_l1, noise_kind, signals);
        if (sweep->parsed()) return cmd_sweep(opt, k_list_csv, n_list_csv, rows_path);
        if (stability->parsed()) return cmd_stability(opt, noise_list_csv, noise_kind);
        if (certificate->parsed()) return cmd_certificate(opt, beta, gamma);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const UnsupportedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitValidation;
}
