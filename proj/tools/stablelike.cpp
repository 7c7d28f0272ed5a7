// stablelike: classify / drift / simulate / check.
// Exit codes: 0 success (definitive label), 2 Inconclusive, 1 error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stablelike/checks.hpp"
#include "stablelike/classifier.hpp"
#include "stablelike/coeffs.hpp"
#include "stablelike/generator.hpp"
#include "stablelike/json_io.hpp"
#include "stablelike/manifest.hpp"
#include "stablelike/simulate.hpp"
#include "stablelike/version.hpp"

namespace fs = std::filesystem;
using namespace stablelike;
using io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInconclusive = 2;

using manifest::Manifest;

struct Outputs {
    Manifest* manifest = nullptr;
    void write(const std::string& path, const std::string& content) { manifest::write_output(path, content, manifest); }
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// line:col for a byte offset
std::string location(const std::string& text, std::size_t off) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < off && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return std::to_string(line) + ":" + std::to_string(col);
}

struct LoadedSymbol {
    std::string path;
    std::string text;
    coeffs::SymbolTriple triple;
    coeffs::ValidationReport report;
};

LoadedSymbol load_symbol(const std::string& path, Manifest& m) {
    LoadedSymbol s;
    s.path = path;
    s.text = coeffs::read_file(path);
    m.add_input(path, s.text);
    try {
        const auto f = coeffs::parse_symbol_text(s.text);
        s.triple = coeffs::triple_from_file(f);
        s.report = coeffs::validate_triple(s.triple, f.grid);
    } catch (const SyntaxError& e) {
        std::string msg = path + ":" + location(s.text, e.offset()) + ": " + e.what();
        throw SyntaxError(msg, e.offset(), e.expected());
    }
    if (!s.report.pass) {
        std::string msg = path + ": symbol validation failed";
        for (const auto& f : s.report.failures) msg += "\n  " + f;
        throw ValidationError(msg);
    }
    return s;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (...) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) throw PreconditionError("bad number '" + tok + "' in list '" + s + "'");
        out.push_back(v);
    }
    return out;
}

void finish_manifest(Manifest& m, const std::string& path) {
    if (path.empty()) return;
    Outputs o;
    o.write(path, dump(m.to_json()));
}

// ---------------------------------------------------------------------------

struct ClassifyOpts {
    std::string file, json_out, manifest;
    double x0 = 10, ratio = 2;
    int count = 12;
    bool one_sided = false;
    double margin_tol = 1e-3, trend_tol = 1e-3;
    int theta_levels = 6;
    std::optional<double> eta;
};

int cmd_classify(const ClassifyOpts& o, bool verbose, int argc, char** argv) {
    Manifest m("classify");
    m.set_argv(argc, argv);
    auto s = load_symbol(o.file, m);
    classifier::ClassifyConfig cfg;
    cfg.grid = {o.x0, o.ratio, o.count, !o.one_sided};
    cfg.margin_tol = o.margin_tol;
    cfg.trend_tol = o.trend_tol;
    cfg.theta_levels = o.theta_levels;
    m.set_config(io::to_json(cfg));
    const auto v = o.eta ? classifier::classify_f_ergodic(s.triple, *o.eta, cfg) : classifier::classify(s.triple, cfg);
    json j = io::to_json(v);
    j["symbol"] = io::to_json(s.triple);
    j["validation_warnings"] = s.report.warnings;
    Outputs out{&m};
    if (!o.json_out.empty()) out.write(o.json_out, dump(j));
    std::printf("%s  margin=%.6g%s%s\n", classifier::to_string(v.label), v.margin,
                v.fired.empty() ? "" : "  via ", v.fired.c_str());
    for (const auto& c : v.caveats) std::printf("  caveat: %s\n", c.c_str());
    if (verbose)
        for (const auto& c : v.conditions)
            std::fprintf(stderr, "  condition %s%s: value=%.6g trend=%.3g certified=%d\n", c.id.c_str(),
                         c.theta ? (" theta=" + io::json(*c.theta).dump()).c_str() : "", c.estimate.value,
                         c.estimate.trend, c.certified ? 1 : 0);
    finish_manifest(m, o.manifest);
    return v.label == classifier::Label::Inconclusive ? kExitInconclusive : kExitOk;
}

struct DriftOpts {
    std::string file, mode = "recurrent", csv_out, json_out, manifest, xs;
    std::optional<double> theta;
    double x0 = 10, ratio = 10;
    int count = 4;
    double abs_tol = 1e-9, rel_tol = 1e-10, core_split = 1e-3;
    int max_subdivisions = 2000;
};

int cmd_drift(const DriftOpts& o, unsigned threads, bool verbose, int argc, char** argv) {
    Manifest m("drift");
    m.set_argv(argc, argv);
    auto s = load_symbol(o.file, m);
    const auto mode = generator::drift_mode_from_string(o.mode);
    generator::TestFunction V;
    switch (mode) {
    case generator::DriftMode::Recurrent:
        if (o.theta) throw PreconditionError("drift: --theta is not used in recurrent mode");
        V = generator::TestFunction::log_barrier();
        break;
    case generator::DriftMode::Transient:
        if (!o.theta) throw PreconditionError("drift: transient mode needs --theta in (0,1)");
        V = generator::TestFunction::bounded_power(*o.theta);
        break;
    case generator::DriftMode::Ergodic:
        if (!o.theta) throw PreconditionError("drift: ergodic mode needs --theta in (1, alpha_inf)");
        V = generator::TestFunction::power(*o.theta);
        break;
    }
    const auto xs = o.xs.empty() ? generator::geometric_grid(o.x0, o.ratio, o.count) : parse_list(o.xs);
    generator::QuadratureConfig q;
    q.abs_tol = o.abs_tol;
    q.rel_tol = o.rel_tol;
    q.core_split = o.core_split;
    q.max_subdivisions = o.max_subdivisions;
    m.set_config({{"mode", o.mode}, {"theta", o.theta ? json(*o.theta) : json(nullptr)}, {"xs", xs},
                  {"quadrature", io::to_json(q)}});
    const auto prof = generator::drift_profile(s.triple, V, mode, xs, q, threads);
    Outputs out{&m};
    if (!o.csv_out.empty()) {
        std::ostringstream os;
        io::write_csv(os, prof);
        out.write(o.csv_out, os.str());
    }
    json j = io::to_json(prof, V);
    j["symbol"] = io::to_json(s.triple);
    if (!o.json_out.empty()) out.write(o.json_out, dump(j));
    std::printf("%s profile: %zu points, tail max |residual| = %.6g%s\n", generator::to_string(mode),
                prof.points.size(), prof.tail_max_abs_residual(), prof.partial ? "  (PARTIAL)" : "");
    if (verbose)
        for (const auto& p : prof.points)
            std::fprintf(stderr, "  x=%-10.6g scaled=%-14.8g asymptote=%-14.8g residual=%-10.4g%s\n", p.x, p.scaled,
                         p.asymptote, p.residual, p.ok ? "" : ("  " + p.error).c_str());
    finish_manifest(m, o.manifest);
    if (prof.partial) {
        std::fprintf(stderr, "error: quadrature did not converge at one or more points (flagged ok=0)\n");
        return kExitError;
    }
    return kExitOk;
}

struct SimOpts {
    std::string file, csv_out, json_out, manifest, out_dir;
    int m = 100;
    double T = 1000, K = 10, x0 = 0;
    std::size_t paths = 400, stride = 0, thin = 1, max_recorded = 50'000'000;
    std::optional<std::uint64_t> seed;
    std::optional<int> compare_m;
};

int cmd_simulate(SimOpts o, unsigned threads, bool verbose, int argc, char** argv) {
    Manifest man("simulate");
    man.set_argv(argc, argv);
    auto s = load_symbol(o.file, man);
    if (!o.out_dir.empty()) {
        if (o.csv_out.empty()) o.csv_out = (fs::path(o.out_dir) / "ensemble.csv").string();
        if (o.json_out.empty()) o.json_out = (fs::path(o.out_dir) / "diagnostics.json").string();
        if (o.manifest.empty()) o.manifest = (fs::path(o.out_dir) / "manifest.json").string();
    }
    std::uint64_t seed;
    bool drawn = false;
    if (o.seed) {
        seed = *o.seed;
    } else {
        std::random_device rd;
        seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        drawn = true;
    }
    man.set_seed(seed);
    simulate::SimConfig cfg;
    cfg.m = o.m;
    cfg.horizon = o.T;
    cfg.n_paths = o.paths;
    cfg.seed = seed;
    cfg.x0 = o.x0;
    cfg.compact_K = o.K;
    cfg.record_stride = o.stride;
    cfg.max_recorded = o.max_recorded;
    cfg.threads = threads;
    man.set_config(io::to_json(cfg));
    // throws ResourceLimitError before anything is written
    const auto e = simulate::simulate_ensemble(s.triple, cfg);
    const auto d = simulate::diagnostics(e, o.K);
    json j{{"schema", "stablelike.simulate/1"}};
    j["config_echo"] = io::to_json(cfg);
    j["seed_drawn"] = drawn;
    j["symbol"] = io::to_json(s.triple);
    j["diagnostics"] = io::to_json(d);
    j["diagnostics_half_horizon"] = io::to_json(simulate::diagnostics(e, o.K, o.T / 2.0));
    j["probe_bands"] = io::to_json(simulate::ProbeBands{});
    if (o.compare_m) {
        auto c2 = cfg;
        c2.m = *o.compare_m;
        const auto e2 = simulate::simulate_ensemble(s.triple, c2);
        j["discretization_check"] = {{"m", *o.compare_m}, {"diagnostics", io::to_json(simulate::diagnostics(e2, o.K))}};
    }
    j["versions"] = io::versions();
    Outputs out{&man};
    if (!o.csv_out.empty()) {
        std::ostringstream os;
        io::write_csv(os, e, o.thin);
        out.write(o.csv_out, os.str());
    }
    if (!o.json_out.empty()) out.write(o.json_out, dump(j));
    std::printf("return_fraction=%s occupation_fraction=%.6g median|X_T|=%.6g (paths=%zu, seed=%llu)\n",
                std::isfinite(d.return_fraction) ? json(d.return_fraction).dump().c_str() : "null",
                d.occupation_fraction, d.q50, d.n_paths, static_cast<unsigned long long>(seed));
    if (verbose) std::fprintf(stderr, "%s\n", j["diagnostics"].dump(2).c_str());
    finish_manifest(man, o.manifest);
    return kExitOk;
}

int cmd_check(const std::string& suite, const std::string& json_out, const std::string& manifest, int argc,
              char** argv) {
    Manifest m("check");
    m.set_argv(argc, argv);
    m.set_config({{"suite", suite}});
    const auto rs = checks::run_suite(suite);
    std::printf("%s", checks::format_table(rs).c_str());
    Outputs out{&m};
    if (!json_out.empty()) out.write(json_out, dump(io::to_json(rs)));
    finish_manifest(m, manifest);
    const bool ok = checks::all_pass(rs);
    std::printf("%s\n", ok ? "all checks passed" : "CHECKS FAILED");
    return ok ? kExitOk : kExitError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recurrence, transience and ergodicity of stable-like processes"};
    app.set_version_flag("--version", std::string("stablelike ") + kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    bool verbose = false;
    app.add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
    app.add_flag("-v,--verbose", verbose, "extra detail on stderr");
#ifdef STABLELIKE_FAULT_HOOKS
    std::string fault;
    app.add_option("--inject-fault", fault, "test build only: corrupt a routine")->check(CLI::IsMember({"digamma"}));
#endif

    ClassifyOpts co;
    auto* cl = app.add_subcommand("classify", "classify a symbol file");
    cl->add_option("symbol_file", co.file)->required();
    cl->add_option("--json", co.json_out, "write verdict JSON ('-' for stdout)");
    cl->add_option("--manifest", co.manifest, "write run manifest");
    cl->add_option("--x0", co.x0, "first grid point")->check(CLI::PositiveNumber);
    cl->add_option("--ratio", co.ratio, "grid ratio");
    cl->add_option("--count", co.count, "grid points");
    cl->add_flag("--one-sided", co.one_sided, "only +x on the escape grid");
    cl->add_option("--margin-tol", co.margin_tol);
    cl->add_option("--trend-tol", co.trend_tol);
    cl->add_option("--theta-levels", co.theta_levels);
    cl->add_option("--eta", co.eta, "test f-ergodicity with f(x)=|x|^eta");

    DriftOpts dopt;
    auto* dr = app.add_subcommand("drift", "scaled generator profile against its asymptote");
    dr->add_option("symbol_file", dopt.file)->required();
    dr->add_option("--mode", dopt.mode)->check(CLI::IsMember({"recurrent", "transient", "ergodic"}));
    dr->add_option("--theta", dopt.theta);
    dr->add_option("--grid", dopt.xs, "comma-separated x values (overrides --x0/--ratio/--count)");
    dr->add_option("--x0", dopt.x0);
    dr->add_option("--ratio", dopt.ratio);
    dr->add_option("--count", dopt.count);
    dr->add_option("--abs-tol", dopt.abs_tol);
    dr->add_option("--rel-tol", dopt.rel_tol);
    dr->add_option("--core-split", dopt.core_split);
    dr->add_option("--max-subdivisions", dopt.max_subdivisions);
    dr->add_option("--csv", dopt.csv_out, "profile CSV");
    dr->add_option("--json", dopt.json_out, "profile JSON summary");
    dr->add_option("--manifest", dopt.manifest);

    SimOpts so;
    auto* sm = app.add_subcommand("simulate", "Monte Carlo chain approximation");
    sm->add_option("symbol_file", so.file)->required();
    sm->add_option("--m", so.m, "steps per unit time")->check(CLI::PositiveNumber);
    sm->add_option("--T", so.T, "horizon");
    sm->add_option("--paths", so.paths)->check(CLI::PositiveNumber);
    sm->add_option("--seed", so.seed, "64-bit seed (drawn and recorded when absent)");
    sm->add_option("--K", so.K, "compact set radius");
    sm->add_option("--x0", so.x0);
    sm->add_option("--stride", so.stride, "steps between recorded states (default m)");
    sm->add_option("--thin", so.thin, "CSV keeps every n-th record");
    sm->add_option("--max-recorded", so.max_recorded, "cap on recorded values");
    sm->add_option("--compare-m", so.compare_m, "rerun at a second m to flag discretisation sensitivity");
    sm->add_option("--csv", so.csv_out);
    sm->add_option("--json", so.json_out);
    sm->add_option("--manifest", so.manifest);
    sm->add_option("--out-dir", so.out_dir, "write ensemble.csv, diagnostics.json, manifest.json here");

    std::string suite = "all", check_json, check_manifest;
    auto* ck = app.add_subcommand("check", "run built-in property suites");
    ck->add_option("--suite", suite)->check(CLI::IsMember({"specfun", "generator", "all"}));
    ck->add_option("--json", check_json);
    ck->add_option("--manifest", check_manifest);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitError;
    }
#ifdef STABLELIKE_FAULT_HOOKS
    if (fault == "digamma") specfun::fault::digamma = true;
#endif
    try {
        if (*cl) return cmd_classify(co, verbose, argc, argv);
        if (*dr) return cmd_drift(dopt, threads, verbose, argc, argv);
        if (*sm) return cmd_simulate(so, threads, verbose, argc, argv);
        if (*ck) return cmd_check(suite, check_json, check_manifest, argc, argv);
    } catch (const SyntaxError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
