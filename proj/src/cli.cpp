#include "ck/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ck/report.hpp"

#ifndef CK_VERSION
#define CK_VERSION "0.0.0"
#endif
#ifndef CK_GIT_REVISION
#define CK_GIT_REVISION "unknown"
#endif

namespace ck::cli {

namespace {

using nlohmann::json;

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::uint64_t entropy_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
}

json settings_json(const Settings& s, std::uint64_t seed) {
    return {{"law", s.law},
            {"alpha", s.alpha},
            {"sigma", s.sigma},
            {"q", s.q},
            {"z_law", s.z_law},
            {"sigma_z", s.sigma_z},
            {"sigma_w", s.sigma_w},
            {"sigma_x", s.sigma_x},
            {"activation", s.activation},
            {"cutoff", s.cutoff},
            {"act_amplitude", s.act_amplitude},
            {"act_scale", s.act_scale},
            {"phi", s.phi},
            {"psi", s.psi},
            {"kmax", s.kmax},
            {"engine", s.engine},
            {"n", s.n},
            {"m", s.m},
            {"p", s.p},
            {"trials", s.trials},
            {"bins", s.bins},
            {"seed", seed},
            {"out_dir", s.out_dir},
            {"mc_outer", s.mc_outer},
            {"mc_inner", s.mc_inner},
            {"coeff_tol", s.coeff_tol},
            {"method", s.method},
            {"audit", s.audit},
            {"eigenvalue_files", s.eigenvalue_files}};
}

// Collects written files relative to the output directory.
class Outputs {
public:
    explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
    void write(const std::string& rel, const std::string& content) {
        report::write_file((std::filesystem::path(dir_) / rel).string(), content);
        files_.push_back(rel);
    }
    const std::vector<std::string>& files() const { return files_; }
    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::vector<std::string> files_;
};

struct RunContext {
    std::string command;
    std::vector<std::string> argv;
    Settings settings;
    std::uint64_t seed = 0;
    std::string seed_source;
    std::string started;
};

void write_manifest(Outputs& out, const RunContext& ctx, const json& extra) {
    out.write("run_config.toml", settings_toml(ctx.settings, ctx.seed));
    json j;
    j["command"] = ctx.command;
    j["argv"] = ctx.argv;
    j["config"] = settings_json(ctx.settings, ctx.seed);
    j["seed"] = ctx.seed;
    j["seed_source"] = ctx.seed_source;
    j["code_version"] = {{"version", CK_VERSION}, {"revision", CK_GIT_REVISION}};
    j["workers"] = worker_count();
    j["started_utc"] = ctx.started;
    j["finished_utc"] = utc_now();
    std::vector<std::string> files = out.files();
    files.push_back("manifest.json");
    j["outputs"] = files;
    for (auto& [k, v] : extra.items()) j[k] = v;
    report::write_file((std::filesystem::path(out.dir()) / "manifest.json").string(), j.dump(2) + "\n");
}

int engine_cap(const std::string& e) {
    if (e == "main") return kMainCap;
    if (e == "oracle") return kOracleCap;
    return kGaussCap;
}

json hankel_json(const MomentReport& rep) {
    HankelResult h = hankel_check(rep);
    return {{"psd", h.psd},
            {"min_eig", h.min_eig},
            {"tolerance", h.tolerance},
            {"min_eig_shifted", h.min_eig_shifted},
            {"tolerance_shifted", h.tolerance_shifted}};
}

void print_reports(std::ostream& os, const std::vector<MomentReport>& reps) {
    for (auto& r : reps) {
        os << "engine " << r.engine << "\n";
        for (auto& e : r.moments) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "  m_%d = %.10g  +- %.3g\n", e.k, e.value, e.error);
            os << buf;
        }
        for (auto& w : r.warnings) os << "  warning: coefficient above tolerance " << w << "\n";
    }
}

int cmd_moments(const RunContext& ctx, std::ostream& os) {
    const Settings& s = ctx.settings;
    ModelParams params = model_params(s, ctx.seed);
    std::vector<MomentReport> reps;
    json skipped = json::array();
    const bool all = s.engine == "all";
    for (auto& e : resolve_engines(s)) {
        if (all && e == "gauss" && !params.law.is_gaussian_family()) {
            skipped.push_back({{"engine", e}, {"reason", "law is not Gaussian"}});
            continue;
        }
        int k = s.kmax;
        if (all && k > engine_cap(e)) {
            skipped.push_back({{"engine", e}, {"reason", "k > " + std::to_string(engine_cap(e)) + " beyond cap"}});
            k = engine_cap(e);
        }
        reps.push_back(run_engine(e, params, k));
    }
    Outputs out(s.out_dir);
    json doc;
    doc["reports"] = json::array();
    doc["hankel"] = json::object();
    for (auto& r : reps) {
        doc["reports"].push_back(report::to_json(r));
        if (r.moments.size() >= 2) doc["hankel"][r.engine] = hankel_json(r);
    }
    doc["skipped"] = skipped;
    if (reps.size() > 1) {
        json dev = json::array();
        for (auto& d : report::max_pairwise_deviation(reps)) dev.push_back(d ? json(*d) : json(nullptr));
        doc["max_pairwise_deviation"] = dev;
    }
    out.write("moments.json", doc.dump(2) + "\n");
    out.write("moments.csv", reps.size() == 1 ? report::moments_csv(reps[0]) : report::moments_csv_wide(reps));
    write_manifest(out, ctx, json::object());
    print_reports(os, reps);
    os << "wrote " << out.dir() << "/moments.json and moments.csv\n";
    return 0;
}

void write_trials(Outputs& out, const Settings& s, const SimulationReport& rep) {
    out.write("histogram.csv", report::histogram_csv(rep.hist));
    if (!s.eigenvalue_files) return;
    for (auto& smp : rep.samples) {
        char name[64];
        std::snprintf(name, sizeof name, "eigenvalues/trial_%04ld.csv", smp.trial);
        out.write(name, report::eigenvalues_csv(smp));
    }
}

json sim_diagnostics(const SimulationReport& rep) {
    return {{"worst_psd_violation", rep.worst_psd},
            {"worst_trace_mismatch", rep.worst_trace},
            {"worst_audit_residual", rep.worst_audit},
            {"variance", rep.variance}};
}

int cmd_simulate(const RunContext& ctx, std::ostream& os) {
    const Settings& s = ctx.settings;
    SimConfig cfg = sim_config(s, ctx.seed);
    SimulationReport rep = run_trials(cfg);
    Outputs out(s.out_dir);
    write_trials(out, s, rep);
    std::vector<report::MomentRow> rows;
    for (int k = 1; k <= cfg.k_max; ++k) rows.push_back({k, rep.mean[k - 1], rep.stderr_[k - 1], {}, {}, {}});
    out.write("sim_moments.csv", report::moment_table_csv(rows));
    write_manifest(out, ctx, {{"diagnostics", sim_diagnostics(rep)}});
    for (auto& r : rows) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "  mean m_%d = %.10g  +- %.3g\n", r.k, r.mean, r.stderr_);
        os << buf;
    }
    os << "wrote " << out.dir() << "/histogram.csv and sim_moments.csv\n";
    return 0;
}

int cmd_compare(const RunContext& ctx, std::ostream& os, std::ostream& err) {
    Settings s = ctx.settings;
    if (s.engine == "all") throw ConfigError("engine", "compare needs a single theory engine");
    const double phi = static_cast<double>(s.n) / static_cast<double>(s.m);
    const double psi = static_cast<double>(s.n) / static_cast<double>(s.p);
    if (s.phi != phi || s.psi != psi)
        err << "note: compare uses phi = n/m = " << phi << " and psi = n/p = " << psi << "\n";
    s.phi = phi;
    s.psi = psi;
    ModelParams params = model_params(s, ctx.seed);
    const std::string engine = resolve_engines(s).front();
    MomentReport theory = run_engine(engine, params, s.kmax);
    SimConfig cfg = sim_config(s, ctx.seed);
    SimulationReport rep = run_trials(cfg);

    std::vector<report::MomentRow> rows;
    bool gate_ok = true;
    for (int k = 1; k <= s.kmax; ++k) {
        const auto& t = theory.moments[k - 1];
        report::MomentRow r{k, rep.mean[k - 1], rep.stderr_[k - 1], t.value, t.error, {}};
        r.z_score = report::z_score(r.mean, r.stderr_, t.value, t.error);
        if (k <= 3 && !(*r.z_score <= 4.0)) gate_ok = false;
        rows.push_back(r);
    }
    Outputs out(s.out_dir);
    write_trials(out, s, rep);
    out.write("moments.json", json{{"reports", {report::to_json(theory)}}}.dump(2) + "\n");
    out.write("compare.csv", report::moment_table_csv(rows));
    RunContext c2 = ctx;
    c2.settings = s;
    write_manifest(out, c2, {{"diagnostics", sim_diagnostics(rep)}, {"gate_pass", gate_ok}});
    os << "k  empirical (stderr)  theory (err)  z\n";
    for (auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%d  %.8g (%.3g)  %.8g (%.3g)  %.3f\n", r.k, r.mean, r.stderr_, *r.theory,
                      *r.theory_err, *r.z_score);
        os << buf;
    }
    os << (gate_ok ? "compare: all z <= 4 for k <= 3\n" : "compare: z > 4 for some k <= 3\n");
    return gate_ok ? 0 : 1;
}

int cmd_selftest(const std::string& mutate, std::ostream& os) {
    WrapRule wrap = WrapRule::include;
    if (mutate == "drop-wrap")
        wrap = WrapRule::omit;
    else if (mutate != "none")
        throw ConfigError("mutate", "unknown mutation '" + mutate + "'");
    bool ok = true;
    for (auto& r : selftest(wrap)) {
        os << r.name << ": " << (r.pass ? "PASS" : "FAIL");
        if (!r.detail.empty()) os << " (" << r.detail << ")";
        os << "\n";
        ok = ok && r.pass;
    }
    os << (ok ? "selftest: PASS\n" : "selftest: FAIL\n");
    return ok ? 0 : 1;
}

}  // namespace

WeightLaw make_law(const Settings& s) {
    if (s.law == "gauss") return WeightLaw::gaussian(s.sigma_w);
    if (s.law == "stable") return WeightLaw::stable(s.alpha, s.sigma);
    if (s.law == "sparse") {
        ZLaw z;
        if (s.z_law == "rademacher")
            z = ZLaw::rademacher;
        else if (s.z_law == "gaussian")
            z = ZLaw::gaussian;
        else
            throw ConfigError("z_law", "z_law must be rademacher or gaussian");
        return WeightLaw::sparse(s.q, z, s.sigma_z);
    }
    throw ConfigError("law", "law must be gauss, stable or sparse");
}

Activation make_activation(const Settings& s) {
    return Activation::builtin(s.activation, s.cutoff, s.act_amplitude, s.act_scale);
}

ModelParams model_params(const Settings& s, std::uint64_t seed) {
    ModelParams p;
    p.phi = s.phi;
    p.psi = s.psi;
    p.activation = make_activation(s);
    p.law = make_law(s);
    p.sigma_x = s.sigma_x;
    if (s.mc_outer < 1) throw ConfigError("mc_outer", "mc_outer must be positive");
    if (s.mc_inner < 1) throw ConfigError("mc_inner", "mc_inner must be positive");
    if (!(s.coeff_tol >= 0.0)) throw ConfigError("coeff_tol", "coeff_tol must be nonnegative");
    if (s.method != "auto" && s.method != "levy" && s.method != "fourier")
        throw ConfigError("method", "method must be auto, levy or fourier");
    if (s.kmax < 1) throw ConfigError("kmax", "kmax must be positive");
    p.coeff.mc_outer = s.mc_outer;
    p.coeff.mc_inner = s.mc_inner;
    p.coeff.coeff_tol = s.coeff_tol;
    p.coeff.method = s.method;
    p.coeff.seed = seed;
    p.validate();
    return p;
}

SimConfig sim_config(const Settings& s, std::uint64_t seed) {
    SimConfig c;
    c.n = s.n;
    c.m = s.m;
    c.p = s.p;
    c.law = make_law(s);
    c.activation = make_activation(s);
    c.sigma_x = s.sigma_x;
    c.trials = s.trials;
    c.seed = seed;
    c.histogram_bins = s.bins;
    c.k_max = s.kmax;
    c.audit = s.audit;
    c.validate();
    return c;
}

std::vector<std::string> resolve_engines(const Settings& s) {
    if (s.engine == "all") return {"main", "gauss", "oracle"};
    if (s.engine == "auto") return {make_law(s).is_gaussian_family() ? "gauss" : "main"};
    if (s.engine == "main" || s.engine == "gauss" || s.engine == "oracle") return {s.engine};
    throw ConfigError("engine", "engine must be auto, main, gauss, oracle or all");
}

MomentReport run_engine(const std::string& engine, const ModelParams& params, int k_max) {
    if (engine == "main") return MainEngine(params).run(k_max);
    if (engine == "gauss") return GaussEngine(params).run(k_max);
    if (engine == "oracle") return OracleEngine(params).run(k_max);
    throw ConfigError("engine", "unknown engine '" + engine + "'");
}

std::string settings_toml(const Settings& s, std::uint64_t seed) {
    std::ostringstream os;
    auto str = [&](const char* k, const std::string& v) { os << k << " = \"" << v << "\"\n"; };
    auto num = [&](const char* k, double v) { os << k << " = " << report::fmt(v) << "\n"; };
    auto integer = [&](const char* k, long long v) { os << k << " = " << v << "\n"; };
    str("law", s.law);
    num("alpha", s.alpha);
    num("sigma", s.sigma);
    num("q", s.q);
    str("z-law", s.z_law);
    num("sigma-z", s.sigma_z);
    num("sigma-w", s.sigma_w);
    num("sigma-x", s.sigma_x);
    str("activation", s.activation);
    num("cutoff", s.cutoff);
    num("act-amplitude", s.act_amplitude);
    num("act-scale", s.act_scale);
    num("phi", s.phi);
    num("psi", s.psi);
    integer("kmax", s.kmax);
    str("engine", s.engine);
    integer("n", s.n);
    integer("m", s.m);
    integer("p", s.p);
    integer("trials", s.trials);
    integer("bins", s.bins);
    os << "seed = " << seed << "\n";
    str("out-dir", s.out_dir);
    integer("mc-outer", s.mc_outer);
    integer("mc-inner", s.mc_inner);
    num("coeff-tol", s.coeff_tol);
    str("method", s.method);
    os << "audit = " << (s.audit ? "true" : "false") << "\n";
    os << "no-eigenvalues = " << (s.eigenvalue_files ? "false" : "true") << "\n";
    return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"ck: spectral moments of conjugate kernel matrices, in theory and by simulation"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.set_config("--config", "", "TOML-style flat key = value file; flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);

    Settings s;
    std::uint64_t seed_value = 0;
    bool no_eig = false;
    app.add_option("--law", s.law, "weight law: gauss, stable or sparse")->capture_default_str();
    app.add_option("--alpha", s.alpha, "stability index of the stable law")->capture_default_str();
    app.add_option("--sigma", s.sigma, "scale of the stable law")->capture_default_str();
    app.add_option("--q", s.q, "sparsity of the sparse law")->capture_default_str();
    app.add_option("--z-law", s.z_law, "mark law of the sparse law: rademacher or gaussian")->capture_default_str();
    app.add_option("--sigma-z", s.sigma_z, "standard deviation of Gaussian marks")->capture_default_str();
    app.add_option("--sigma-w", s.sigma_w, "standard deviation of the Gaussian law")->capture_default_str();
    app.add_option("--sigma-x", s.sigma_x, "standard deviation of the data entries")->capture_default_str();
    app.add_option("--activation", s.activation, "zero, identity, gauss_odd, sin_gauss, arctan or tanh")
        ->capture_default_str();
    app.add_option("--cutoff", s.cutoff, "soft cutoff X0 for arctan and tanh")->capture_default_str();
    app.add_option("--act-amplitude", s.act_amplitude, "activation amplitude a in a f(b x)")->capture_default_str();
    app.add_option("--act-scale", s.act_scale, "activation scale b in a f(b x)")->capture_default_str();
    app.add_option("--phi", s.phi, "n/m for the moments command")->capture_default_str();
    app.add_option("--psi", s.psi, "n/p for the moments command")->capture_default_str();
    app.add_option("--kmax", s.kmax, "largest moment order")->capture_default_str();
    app.add_option("--engine", s.engine, "auto, main, gauss, oracle or all")->capture_default_str();
    app.add_option("--n", s.n, "input dimension")->capture_default_str();
    app.add_option("--m", s.m, "number of samples")->capture_default_str();
    app.add_option("--p", s.p, "number of features")->capture_default_str();
    app.add_option("--trials", s.trials, "simulation trials")->capture_default_str();
    app.add_option("--bins", s.bins, "histogram bins")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed_value, "master seed (drawn from system entropy when absent)");
    app.add_option("--out-dir", s.out_dir, "output directory")->capture_default_str();
    app.add_option("--mc-outer", s.mc_outer, "outer Monte Carlo samples per coefficient")->capture_default_str();
    app.add_option("--mc-inner", s.mc_inner, "inner Monte Carlo samples where no closed form exists")
        ->capture_default_str();
    app.add_option("--coeff-tol", s.coeff_tol, "flag coefficients whose error exceeds this (0 disables)")
        ->capture_default_str();
    app.add_option("--method", s.method, "coefficient estimator: auto, levy or fourier")->capture_default_str();
    app.add_flag("--audit", s.audit, "residual audit on five eigenpairs per trial");
    app.add_flag("--no-eigenvalues", no_eig, "skip the per-trial eigenvalue files");

    auto* moments = app.add_subcommand("moments", "limiting moments m_1..m_kmax from the theory engines");
    auto* simulate = app.add_subcommand("simulate", "finite-size spectra, histogram and empirical moments");
    auto* compare = app.add_subcommand("compare", "theory against simulation with a z-score gate for k <= 3");
    auto* selftest_cmd = app.add_subcommand("selftest", "invariant suites of all modules at small sizes");
    std::string mutate = "none";
    selftest_cmd->add_option("--mutate", mutate, "deliberate mutation for the harness: none or drop-wrap")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }
    s.eigenvalue_files = !no_eig;

    try {
        RunContext ctx;
        for (int i = 0; i < argc; ++i) ctx.argv.push_back(argv[i]);
        ctx.started = utc_now();
        if (seed_opt->count() > 0) {
            ctx.seed = seed_value;
            ctx.seed_source = "flag";
        } else {
            ctx.seed = entropy_seed();
            ctx.seed_source = "entropy";
        }
        s.seed = ctx.seed;
        ctx.settings = s;
        if (*moments) {
            ctx.command = "moments";
            return cmd_moments(ctx, out);
        }
        if (*simulate) {
            ctx.command = "simulate";
            return cmd_simulate(ctx, out);
        }
        if (*compare) {
            ctx.command = "compare";
            return cmd_compare(ctx, out, err);
        }
        if (*selftest_cmd) return cmd_selftest(mutate, out);
    } catch (const ConfigError& e) {
        err << "usage error: invalid value for '" << e.key() << "': " << e.what() << "\n";
        return 2;
    } catch (const CapabilityError& e) {
        err << "capability error: " << e.what() << "\n";
        return 3;
    } catch (const EnumerationLimitError& e) {
        err << "capability error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}

}  // namespace ck::cli
