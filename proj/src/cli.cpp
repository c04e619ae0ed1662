#include "eos/cli.hpp"

#include "eos/config.hpp"
#include "eos/fock.hpp"
#include "eos/integrate.hpp"
#include "eos/kernels.hpp"
#include "eos/params.hpp"
#include "eos/quad.hpp"
#include "eos/single_channel.hpp"
#include "eos/two_channel.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace eos::cli {

using nlohmann::json;

namespace {

// Raised for a failed run that is not a usage problem, e.g. non-convergence under --strict.
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string csv() const {
        std::string s;
        for (std::size_t i = 0; i < columns.size(); ++i)
            s += (i ? "," : "") + columns[i];
        s += '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i)
                s += (i ? "," : "") + format_number(r[i]);
            s += '\n';
        }
        return s;
    }

    json to_json() const {
        json rs = json::array();
        for (const auto& r : rows) {
            json o = json::object();
            for (std::size_t i = 0; i < r.size(); ++i)
                o[columns[i]] = r[i];
            rs.push_back(o);
        }
        return json{{"columns", columns}, {"rows", rs}};
    }
};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct Common {
    int set = 1;
    std::string config;
    unsigned threads = 0;
    std::string format = "csv";
    bool strict = false;
    std::string out;
    double rel_tol = quad::QuadratureConfig{}.rel_tol;
    double abs_tol = quad::QuadratureConfig{}.abs_tol;
    std::size_t max_subdiv = quad::QuadratureConfig{}.max_subdivisions;

    quad::QuadratureConfig quad() const {
        quad::QuadratureConfig q;
        q.rel_tol = rel_tol;
        q.abs_tol = abs_tol;
        q.max_subdivisions = max_subdiv;
        q.validate();
        return q;
    }

    ParameterSet params() const {
        ParameterSet base = set == 2 ? ParameterSet::set2() : ParameterSet::set1();
        std::string path = config;
        if (path.empty())
            if (const char* env = std::getenv("EOS_CONFIG"); env && *env)
                path = env;
        ParameterSet p = path.empty() ? base : load_config(path, base);
        p.validate();
        return p;
    }

    std::string config_path() const {
        if (!config.empty())
            return config;
        const char* env = std::getenv("EOS_CONFIG");
        return env ? env : "";
    }
};

void add_common(CLI::App* app, Common& c, bool tabular = true) {
    app->add_option("--set", c.set, "Parameter preset")->check(CLI::IsMember({1, 2}));
    app->add_option("--config", c.config, "Parameter file applied on top of the preset (default: $EOS_CONFIG)");
    app->add_option("--threads", c.threads, "Worker threads (0: available parallelism)");
    if (tabular)
        app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app->add_flag("--strict", c.strict, "Fail when any quadrature does not converge");
    app->add_option("--out", c.out, "Output file (default: stdout)");
    app->add_option("--rel-tol", c.rel_tol, "Quadrature relative tolerance")->check(CLI::PositiveNumber);
    app->add_option("--abs-tol", c.abs_tol, "Quadrature absolute tolerance")->check(CLI::NonNegativeNumber);
    app->add_option("--max-subdiv", c.max_subdiv, "Quadrature subdivision budget")->check(CLI::PositiveNumber);
}

json params_json(const ParameterSet& p) {
    const auto& pr = p.probe;
    const auto& c = p.crystal;
    json probe{{"shape", pr.shape() == ProbeSpectrum::Shape::Rectangular ? "rectangular" : "tabulated"},
               {"center_thz", pr.center_thz()},
               {"bandwidth_thz", pr.bandwidth_thz()},
               {"omega_p_thz", units::thz_from_omega(pr.omega_p())},
               {"photons", pr.photons()}};
    json crystal{{"length_um", c.length_um},
                 {"r41_pm_per_v", c.r41_pm_per_v},
                 {"n", c.n},
                 {"n_g", c.n_g},
                 {"w0_um", c.w0_um},
                 {"dispersion", c.dispersion.name()},
                 {"absorption", c.absorption_enabled},
                 {"mir_window_thz", {c.nu_min_thz, c.nu_max_thz}}};
    return json{{"probe", probe}, {"crystal", crystal}};
}

json tolerances_json(const quad::QuadratureConfig& q) {
    return json{{"rel_tol", q.rel_tol}, {"abs_tol", q.abs_tol}, {"max_subdivisions", q.max_subdivisions}};
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

// Emits a payload to --out (with a manifest) or to stdout.
void emit(const Common& c, const std::string& payload, RunManifest m, std::ostream& out) {
    if (c.out.empty()) {
        out << payload;
        return;
    }
    m.outputs = {c.out};
    write_atomic(c.out, payload);
    json j = m.to_json();
    write_atomic(manifest_path(c.out), j.dump(2) + "\n");
}

void emit_table(const Common& c, const Table& t, RunManifest m, std::ostream& out) {
    emit(c, c.format == "json" ? t.to_json().dump(2) + "\n" : t.csv(), std::move(m), out);
}

void check_strict(const Common& c, bool converged, const std::string& what) {
    if (c.strict && !converged)
        throw ComputationError(what + ": quadrature did not converge (--strict)");
}

std::vector<double> log_grid(double a, double b, std::size_t n) {
    if (!(a > 0.0 && b > a) || n < 2)
        throw CLI::ValidationError("grid", "need 0 < from < to and at least 2 points");
    std::vector<double> g(n);
    const double la = std::log10(a), lb = std::log10(b);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::pow(10.0, la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1));
    return g;
}

std::vector<double> lin_grid(double a, double b, std::size_t n) {
    if (!(b > a) || n < 2)
        throw CLI::ValidationError("grid", "need from < to and at least 2 points");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

RunManifest start_manifest(const std::string& cmd, const Common& c, const ParameterSet& p) {
    RunManifest m;
    m.command = cmd;
    m.parameter_set = p.label_name();
    m.config = params_json(p);
    if (auto path = c.config_path(); !path.empty())
        m.config["config_file"] = path;
    m.tolerances = tolerances_json(c.quad());
    return m;
}

// ---------------------------------------------------------------- sweep-n

struct SweepArgs {
    double n_from = 1e6;
    double n_to = 1e13;
    std::size_t points = 60;
    bool chi3_in_total = false;
};

void cmd_sweep(const Common& c, const SweepArgs& a, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = c.params();
    const KernelContext ctx(p);
    BreakdownOptions opt;
    opt.quad = c.quad();
    opt.threads = c.threads;
    opt.include_chi3_in_total = a.chi3_in_total;
    const auto coeffs = variance_coefficients(ctx, opt);
    check_strict(c, coeffs.converged(), "sweep-n");

    Table t;
    t.columns = {"N", "rms_total_per_photon", "rms_sn", "rms_s1", "s2sq", "s3s1", "s2s0", "s4s0", "chi3"};
    for (double N : log_grid(a.n_from, a.n_to, a.points)) {
        const auto b = breakdown(N, coeffs);
        const double N2 = N * N;
        t.rows.push_back({N, b.rms, std::sqrt(b[VarTerm::S0S0].value) / N, std::sqrt(b[VarTerm::S1S1].value) / N,
                          b[VarTerm::S2SQ].value / N2, b[VarTerm::S3S1].value / N2, b[VarTerm::S2S0].value / N2,
                          b[VarTerm::S4S0].value / N2, b[VarTerm::CHI3].value / N2});
    }

    auto m = start_manifest("sweep-n", c, p);
    json conv = json::object();
    json coef = json::object();
    for (VarTerm v : kVarTerms) {
        conv[term_name(v)] = coeffs[v].converged;
        coef[term_name(v)] = {{"per_N_power", coeffs[v].value}, {"error", coeffs[v].error}, {"power", term_power(v)}};
    }
    m.convergence = conv;
    m.config["coefficients"] = coef;
    m.config["chi3_in_total"] = a.chi3_in_total;
    m.config["chi3_m2_per_v2"] = opt.chi3.chi3_m2_per_v2;
    try {
        const auto nm = find_Nmin(coeffs);
        m.config["N_min"] = nm.N_min;
        m.config["rms_min"] = nm.rms_min;
    } catch (const BracketError&) {
        m.config["N_min"] = nullptr;
    }
    m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_table(c, t, std::move(m), out);
}

// ---------------------------------------------------------------- waist-sweep

struct WaistArgs {
    double w0_from = 0.0;
    double w0_to = 0.0;
    std::size_t points = 16;
};

void cmd_waist(const Common& c, const WaistArgs& a, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = c.params();
    const double L = p.crystal.length_um;
    const double w_lo = a.w0_from > 0.0 ? a.w0_from : 0.5 * p.crystal.w0_um;
    const double w_hi = a.w0_to > 0.0 ? a.w0_to : 2.0 * p.crystal.w0_um;
    // Even spacing in L / w0.
    std::vector<double> w0;
    for (double r : lin_grid(L / w_hi, L / w_lo, a.points))
        w0.push_back(L / r);

    BreakdownOptions opt;
    opt.quad = c.quad();
    opt.threads = c.threads;
    const auto pts = waist_sweep(p, w0, opt);

    Table t;
    t.columns = {"w0_um", "L_over_w0", "N_min", "rms_total", "rms_sn", "rms_s1"};
    for (const auto& wp : pts)
        t.rows.push_back({wp.w0_um, wp.L_over_w0, wp.nmin.N_min, wp.rms_total, wp.rms_shot, wp.rms_s1});

    auto m = start_manifest("waist-sweep", c, p);
    m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_table(c, t, std::move(m), out);
}

// ---------------------------------------------------------------- gating

struct GatingArgs {
    double nu_from = 0.0;
    double nu_to = -1.0;
    std::size_t points = 400;
};

void cmd_gating(const Common& c, const GatingArgs& a, std::ostream& out) {
    const auto p = c.params();
    const KernelContext ctx(p);
    const double hi =
        a.nu_to > 0.0 ? a.nu_to : std::min(p.crystal.nu_max_thz, p.crystal.dispersion.valid_hi_thz);
    const double wp = ctx.omega_p();
    const auto& cr = p.crystal;
    const double scale = std::abs(ctx.d()) * cr.length_um * wp / (2.0 * units::c0 * cr.n);

    Table t;
    t.columns = {"nu_thz", "R_abs2", "zeta_norm", "abs"};
    for (double nu : lin_grid(a.nu_from, hi, a.points)) {
        const double W = units::omega_from_thz(nu);
        t.rows.push_back({nu, std::norm(gating_R(W, ctx)), std::abs(zeta(wp, W, ctx)) / scale,
                          gating_absorption(W, ctx)});
    }
    auto m = start_manifest("gating", c, p);
    emit_table(c, t, std::move(m), out);
}

// ---------------------------------------------------------------- correlate

struct CorrelateArgs {
    double photons = 1e11;
    double tau_max_fs = 2000.0;
    std::size_t points = 400;
    bool half_photons = false;
    bool absorption = false;
};

void cmd_correlate(const Common& c, const CorrelateArgs& a, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = c.params();
    TwoChannelConfig cfg;
    cfg.quad = c.quad();
    cfg.threads = c.threads;
    cfg.half_photons_per_channel = a.half_photons;
    cfg.absorption = a.absorption;
    cfg.tau_fs = lin_grid(0.0, a.tau_max_fs, a.points);
    const auto tr = correlation_trace(a.photons, p, cfg);
    check_strict(c, tr.all_converged(), "correlate");

    Table t;
    t.columns = {"tau_fs"};
    std::vector<std::vector<double>> cols;
    for (CorrTerm term : kCorrTerms) {
        std::string name = term_name(term);
        for (auto& ch : name)
            ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        t.columns.push_back(name);
        cols.push_back(tr.has(term) ? tr.values(term) : std::vector<double>(tr.tau_fs.size(), 0.0));
    }
    t.columns.insert(t.columns.end(), {"g2", "g4", "G"});
    const auto g2 = tr.g_total_2nd(), g4 = tr.g_total_4th(), G = tr.G();
    for (std::size_t i = 0; i < tr.tau_fs.size(); ++i) {
        std::vector<double> row{tr.tau_fs[i]};
        for (const auto& col : cols)
            row.push_back(col[i]);
        row.insert(row.end(), {g2[i], g4[i], G[i]});
        t.rows.push_back(std::move(row));
    }

    auto m = start_manifest("correlate", c, p);
    m.config["N"] = a.photons;
    m.config["photons_per_channel"] = tr.photons;
    m.config["normalization_C"] = tr.C;
    m.config["absorption"] = a.absorption;
    json conv = json::object();
    for (CorrTerm term : kCorrTerms) {
        const auto& f = tr.converged[static_cast<std::size_t>(term)];
        conv[term_name(term)] = std::all_of(f.begin(), f.end(), [](bool b) { return b; });
    }
    m.convergence = conv;
    m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_table(c, t, std::move(m), out);
}

// ---------------------------------------------------------------- chi3

struct Chi3Args {
    double X = Chi3Params{}.chi3_m2_per_v2;
};

void cmd_chi3(const Common& c, const Chi3Args& a, std::ostream& out) {
    const auto p = c.params();
    const KernelContext ctx(p);
    Chi3Params x;
    x.chi3_m2_per_v2 = a.X;
    const auto q = c.quad();
    const auto chi = var_chi3(1.0, ctx, x, q);
    const auto s2 = var_S2_sq(1.0, ctx, q);
    const auto T = chi3_integral(ctx, q);
    check_strict(c, chi.converged && s2.converged && T.converged, "chi3");

    Table t;
    t.columns = {"chi3_m2_per_v2", "chi3_per_N3", "chi3_error", "integral_ps4", "s2sq_per_N3", "ratio_to_s2sq"};
    t.rows.push_back({a.X, chi.value, chi.error, T.value, s2.value, chi.value / s2.value});
    auto m = start_manifest("chi3", c, p);
    m.convergence = {{"CHI3", chi.converged}, {"S2SQ", s2.converged}};
    emit_table(c, t, std::move(m), out);
}

// ---------------------------------------------------------------- oracle

struct OracleArgs {
    double alpha = 1.0;
    double A_re = 0.01, A_im = 0.0, C_re = 0.0, C_im = 0.0;
    std::vector<int> cutoffs;
    int channels = 1;
    bool exact = false;
};

void cmd_oracle(const Common& c, const OracleArgs& a, std::ostream& out) {
    fock::ThreeModeModel m;
    m.A = {a.A_re, a.A_im};
    m.C = {a.C_re, a.C_im};
    m.alpha = a.alpha;
    m.channels = a.channels;
    if (a.channels == 2) {
        m.A2 = m.A;
        m.C2 = m.C;
        m.alpha2 = m.alpha;
    }
    m.cutoffs = a.cutoffs;
    m.validate();

    auto diag = [](const fock::Diagnostics& d) {
        return json{{"coherent_norm", d.coherent_norm},
                    {"boundary_population", d.boundary_population},
                    {"truncation_flag", d.truncation_flag},
                    {"warnings", d.warnings}};
    };
    json j{{"model",
            {{"A", {a.A_re, a.A_im}},
             {"C", {a.C_re, a.C_im}},
             {"alpha", a.alpha},
             {"channels", a.channels},
             {"cutoffs", m.resolved_cutoffs()}}}};
    namespace cf = fock::closed_form;
    if (a.channels == 1) {
        const auto pc = fock::perturbative_components(m);
        const auto hv = fock::heisenberg_variances(m);
        j["perturbative"] = {{"shot", pc.shot},
                             {"sig1_sq", pc.sig1_sq},
                             {"sig0_sig2", pc.sig0_sig2},
                             {"first_order", pc.first_order},
                             {"variance", fock::perturbative_variance(m)},
                             {"diagnostics", diag(pc.diagnostics)}};
        j["heisenberg"] = {{"S1_sq", hv.S1_sq}, {"S2S0_sym", hv.S2S0_sym}, {"diagnostics", diag(hv.diagnostics)}};
        j["closed_form"] = {{"variance", cf::variance(m.A, m.C, m.alpha)},
                            {"sig1_sq", cf::sig1_sq(m.A, m.alpha)},
                            {"sig0_sig2", cf::sig0_sig2(m.A, m.C, m.alpha)},
                            {"S1_sq", cf::S1_sq(m.A, m.C, m.alpha)},
                            {"S2S0_sym", cf::S2S0_sym(m.A, m.C, m.alpha)}};
        if (a.exact) {
            const auto ex = fock::exact_variance(m);
            j["exact"] = {{"variance", ex.variance},
                          {"norm", ex.norm},
                          {"residual_vs_perturbative", ex.variance - fock::perturbative_variance(m)},
                          {"diagnostics", diag(ex.diagnostics)}};
        }
    } else {
        const auto o = fock::two_channel_oracle(m);
        j["two_channel"] = {{"cross_sig1", o.cross_sig1},
                            {"cross_sig02", o.cross_sig02},
                            {"base_cross", o.base_cross},
                            {"diagnostics", diag(o.diagnostics)}};
        j["closed_form"] = {{"cross_sig1", cf::cross_sig1(m.A, m.A2, m.alpha, m.alpha2)},
                            {"cross_sig02", cf::cross_sig02(m.A, m.A2, m.C, m.C2, m.alpha, m.alpha2)}};
        if (a.exact)
            j["exact"] = "exact evolution is single-channel only";
    }
    RunManifest man;
    man.command = "oracle";
    man.parameter_set = "ThreeModeModel";
    man.config = j["model"];
    emit(c, j.dump(2) + "\n", std::move(man), out);
}

// ---------------------------------------------------------------- selftest

struct Check {
    std::string name;
    std::function<std::string()> run; // empty string: pass, otherwise the failure detail
};

std::string expect_close(double got, double want, double rel, double abs = 0.0) {
    const double tol = std::max(abs, rel * std::abs(want));
    if (std::abs(got - want) <= tol && std::isfinite(got))
        return {};
    return fmt::format("got {:.12e}, expected {:.12e} (tol {:.1e})", got, want, tol);
}

std::string expect_small(double v, double scale, double rel) {
    if (std::abs(v) <= rel * std::abs(scale) && std::isfinite(v))
        return {};
    return fmt::format("|{:.3e}| exceeds {:.1e} x {:.3e}", v, rel, scale);
}

std::vector<Check> selftest_checks(const quad::QuadratureConfig& q) {
    std::vector<Check> out;
    auto add = [&](std::string n, std::function<std::string()> f) { out.push_back({std::move(n), std::move(f)}); };

    const ParameterSet s1 = ParameterSet::set1();
    const ParameterSet s2 = ParameterSet::set2();

    add("lorentzian DC index", [] {
        return expect_close(refractive_index(0.0, DispersionModel::set1()), std::sqrt(6.7) * 6.2 / 5.3, 1e-12);
    });
    add("absorption at zero frequency", [] { return expect_close(absorption(0.0), 1.0, 1e-15); });
    add("absorption disabled", [] { return expect_close(absorption(30.0, false), 1.0, 0.0); });
    add("zeta at zero MIR frequency", [s1] {
        const KernelContext ctx(s1);
        const double w = ctx.omega_p();
        const auto z = zeta(w, 0.0, ctx);
        const auto& c = s1.crystal;
        const double mod = std::abs(ctx.d()) * c.length_um * w / (2.0 * units::c0 * c.n);
        auto r = expect_close(std::abs(z), mod, 1e-12);
        if (r.empty())
            r = expect_close(std::arg(z), ctx.d() < 0 ? std::numbers::pi / 2 : -std::numbers::pi / 2, 1e-12);
        return r;
    });
    add("probe overlap normalization", [s1] {
        const KernelContext ctx(s1);
        return expect_close(std::abs(probe_overlap(0.0, Sign::Minus, ctx)), 1.0, 1e-12);
    });
    add("gating at zero", [s1] {
        const KernelContext ctx(s1);
        return expect_close(std::abs(gating_R(0.0, ctx)), 1.0, 1e-12);
    });
    add("R_1 at zero delay equals R_0", [s1] {
        const KernelContext ctx(s1);
        for (Sign s : kSigns)
            for (double W : {60.0, 300.0, -200.0}) {
                auto r = expect_close(std::abs(rgate(W, 1, 17.0, 0.0, s, ctx) - rgate(W, 0, 0.0, 0.0, s, ctx)), 0.0,
                                      0.0, 1e-14);
                if (!r.empty())
                    return r;
            }
        return std::string{};
    });
    add("R_2 at zero delay vanishes", [s1] {
        const KernelContext ctx(s1);
        for (Sign s : kSigns)
            if (auto r = expect_close(std::abs(rgate(250.0, 2, 5.0, 0.0, s, ctx)), 0.0, 0.0, 1e-15); !r.empty())
                return r;
        return std::string{};
    });
    // alpha is even in w, so the two half-lines carry opposite first moments.
    add("W_0 at origin is the signed mean frequency", [s1] {
        const KernelContext ctx(s1);
        const double wc = units::omega_from_thz(s1.probe.center_thz());
        auto r = expect_close(wgate(0.0, 0.0, 0, 0.0, 0.0, Sign::Plus, ctx).real(), wc, 1e-12);
        if (r.empty())
            r = expect_close(wgate(0.0, 0.0, 0, 0.0, 0.0, Sign::Minus, ctx).real(), -wc, 1e-12);
        return r;
    });
    add("G_ij vanishes with R_2 at zero delay", [s1] {
        const KernelContext ctx(s1);
        return expect_close(std::abs(ggate(80.0, 120.0, 2, 0, 0.0, 0.0, 0.0, Sign::Plus, Sign::Minus, ctx)), 0.0, 0.0,
                            1e-300);
    });
    add("transverse overlap homogeneity", [] {
        const int pw[3] = {2, 3, 2};
        for (int j = 2; j <= 4; ++j)
            if (auto r = expect_close(overlap_A(j, 6.0) / overlap_A(j, 3.0), std::pow(2.0, -pw[j - 2]), 1e-14);
                !r.empty())
                return r;
        return std::string{};
    });
    add("C_jj photon scaling", [s1] {
        const KernelContext ctx(s1);
        const double N = 3.7e9;
        for (int jj = 1; jj <= 2; ++jj)
            if (auto r = expect_close(coeff_C(jj, N, ctx) / coeff_C(jj, 1.0, ctx), std::pow(N, jj + 1), 1e-13);
                !r.empty())
                return r;
        const double c1 = coeff_C(1, N, ctx);
        return expect_close(coeff_C(2, N, ctx) / (c1 * c1), 1.0 / N, 1e-13);
    });
    add("C_1 waist law", [s1] {
        ParameterSet p = s1;
        p.crystal.w0_um *= 2.0;
        return expect_close(coeff_C(1, 1.0, KernelContext(p)) / coeff_C(1, 1.0, KernelContext(s1)), 0.25, 1e-14);
    });
    add("quadrature polynomial", [] {
        auto r = quad::integrate_1d([](double x) { return x * x; }, 0.0, 1.0, {});
        return expect_close(r.value, 1.0 / 3.0, 1e-12);
    });
    add("quadrature full periods", [] {
        quad::QuadratureConfig c;
        auto r = quad::integrate_1d([](double x) { return std::cos(50.0 * x); }, 0.0, 2.0 * std::numbers::pi, c);
        return expect_close(r.value, 0.0, 0.0, std::max(c.abs_tol, 1e-12));
    });
    add("quadrature separable square", [] {
        auto r = quad::integrate_2d([](double x, double y) { return x * y; }, quad::Rect{0, 1, 0, 1}, {});
        return expect_close(r.value, 0.25, 1e-12);
    });
    add("shot noise at N=1", [] { return expect_close(var_base_shot(1.0).value, 1.0, 0.0); });
    add("S1 quadratic in N", [s1, q] {
        const KernelContext ctx(s1);
        return expect_close(var_S1(2e9, ctx, q).value, 4.0 * var_S1(1e9, ctx, q).value, 1e-13);
    });
    add("chi3 vanishes without susceptibility", [s1, q] {
        Chi3Params x;
        x.chi3_m2_per_v2 = 0.0;
        return expect_close(var_chi3(1e10, KernelContext(s1), x, q).value, 0.0, 0.0);
    });

    for (const ParameterSet& p : {s1, s2}) {
        const std::string tag = p.label == ParameterSet::Label::Set1 ? " (set 1)" : " (set 2)";
        add("breakdown additivity" + tag, [p, q] {
            BreakdownOptions o;
            o.quad = q;
            const auto b = breakdown(1e11, KernelContext(p), o);
            double sum = 0.0;
            for (VarTerm t : kVarTerms)
                if (t != VarTerm::CHI3)
                    sum += b[t].value;
            return sum == b.total ? std::string{} : fmt::format("sum {:.17e} != total {:.17e}", sum, b.total);
        });
        add("S2S0 vanishes" + tag, [p, q] {
            const KernelContext ctx(p);
            return expect_small(var_S2_S0(1.0, ctx, q).value, var_S1(1.0, ctx, q).value, 1e-8);
        });
        add("S4S0 vanishes" + tag, [p, q] {
            const KernelContext ctx(p);
            return expect_small(var_S4_S0(1.0, ctx, q).value, var_S2_sq(1.0, ctx, q).value, 1e-8);
        });
    }

    const KernelContext c2 = two_channel_context(s2);
    add("main term at zero delay is twice S1", [c2, q] {
        return expect_close(g2_main(0.0, 1.0, c2, q).value, 2.0 * var_S1(1.0, c2, q).value, 1e-8);
    });
    add("main term even in delay", [c2, q] {
        return expect_close(g2_main(-430.0, 1.0, c2, q).value, g2_main(430.0, 1.0, c2, q).value, 1e-12, 1e-300);
    });
    add("V terms even in delay", [c2, q] {
        for (CorrTerm t : {CorrTerm::V22A, CorrTerm::V22B, CorrTerm::V13A})
            if (auto r = expect_close(corr_term(t, -250.0, 1.0, c2, q).value, corr_term(t, 250.0, 1.0, c2, q).value,
                                      1e-6, 1e-300);
                !r.empty())
                return term_name(t) + ": " + r;
        return std::string{};
    });
    add("CROSS2, V04A and V04B vanish", [c2, q] {
        for (double tau : {0.0, 150.0, 700.0}) {
            const double main = g2_main(0.0, 1.0, c2, q).value;
            const double v22 = corr_term(CorrTerm::V22A, 0.0, 1.0, c2, q).value;
            if (auto r = expect_small(g2_cross_nir(tau, 1.0, c2, q).value, main, 1e-8); !r.empty())
                return "CROSS2 " + r;
            for (CorrTerm t : {CorrTerm::V04A, CorrTerm::V04B})
                if (auto r = expect_small(corr_term(t, tau, 1.0, c2, q).value, v22, 1e-8); !r.empty())
                    return term_name(t) + " " + r;
        }
        return std::string{};
    });
    add("beam splitter defects", [] {
        BeamSplitter b;
        if (std::abs(b.energy_defect()) > 1e-15 || b.phase_defect() > 1e-15)
            return fmt::format("energy {:.2e} phase {:.2e}", b.energy_defect(), b.phase_defect());
        return std::string{};
    });

    add("zero couplings give zero generator", [] {
        fock::ThreeModeModel m;
        m.alpha = 1.0;
        const auto space = fock::make_space(m);
        const auto G = fock::build_generator(m).dense(space);
        return expect_close(G.cwiseAbs().maxCoeff(), 0.0, 0.0);
    });
    add("generator anti-Hermitian", [] {
        fock::ThreeModeModel m;
        m.alpha = 1.0;
        m.A = {0.04, -0.02};
        m.C = {0.01, 0.03};
        const auto space = fock::make_space(m);
        const auto G = fock::build_generator(m).dense(space);
        return expect_close((G + G.adjoint()).cwiseAbs().maxCoeff(), 0.0, 0.0, 1e-12);
    });
    add("uncoupled variance is shot noise", [] {
        fock::ThreeModeModel m;
        m.alpha = {0.8, 0.3};
        auto r = expect_close(fock::perturbative_variance(m), std::norm(m.alpha), 1e-12);
        if (r.empty())
            r = expect_close(fock::exact_variance(m).variance, std::norm(m.alpha), 1e-12);
        return r;
    });
    add("perturbative decomposition", [] {
        fock::ThreeModeModel m;
        m.alpha = 1.0;
        m.A = {0.03, 0.05};
        m.C = {-0.02, 0.04};
        const auto pc = fock::perturbative_components(m);
        return expect_close(pc.sig1_sq + pc.sig0_sig2 + pc.first_order,
                            fock::perturbative_variance(m) - std::norm(m.alpha), 1e-12, 1e-15);
    });
    add("exact evolution preserves the norm", [] {
        fock::ThreeModeModel m;
        m.alpha = 1.0;
        m.A = {0.03, 0.05};
        m.C = {-0.02, 0.04};
        return expect_close(fock::exact_variance(m).norm, 1.0, 0.0, 1e-10);
    });
    return out;
}

int cmd_selftest(const Common& c, std::ostream& out) {
    const auto q = c.quad();
    int failed = 0;
    json results = json::array();
    for (const auto& chk : selftest_checks(q)) {
        std::string detail;
        try {
            detail = chk.run();
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const bool ok = detail.empty();
        failed += ok ? 0 : 1;
        out << (ok ? "PASS " : "FAIL ") << chk.name << (ok ? "" : ": " + detail) << '\n';
        results.push_back({{"check", chk.name}, {"pass", ok}, {"detail", detail}});
    }
    out << fmt::format("{} checks, {} failed\n", results.size(), failed);
    if (!c.out.empty()) {
        RunManifest m;
        m.command = "selftest";
        m.tolerances = tolerances_json(q);
        m.convergence = json{{"failed", failed}};
        emit(c, results.dump(2) + "\n", std::move(m), out);
    }
    return failed ? kComputationError : kOk;
}

} // namespace

json RunManifest::to_json() const {
    json j{{"command", command},       {"parameter_set", parameter_set}, {"config", config},
           {"tolerances", tolerances}, {"convergence", convergence},     {"outputs", outputs}};
    j["hash"] = hash();
    j["wall_time_s"] = wall_time_s;
    return j;
}

std::string RunManifest::hash() const {
    const json j{{"command", command},       {"parameter_set", parameter_set}, {"config", config},
                 {"tolerances", tolerances}, {"convergence", convergence},     {"outputs", outputs}};
    return fmt::format("{:016x}", fnv1a(j.dump()));
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw std::runtime_error("cannot write " + tmp.string());
        f << content;
        f.flush();
        if (!f)
            throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

std::string format_number(double v) { return fmt::format("{:.11e}", v); }

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Electro-optic sampling back-action and correlation calculator", "eos"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    Common common;
    SweepArgs sweep;
    WaistArgs waist;
    GatingArgs gating;
    CorrelateArgs corr;
    Chi3Args chi3;
    OracleArgs oracle;

    auto* s = app.add_subcommand("sweep-n", "Variance breakdown over a log grid of probe photon numbers");
    add_common(s, common);
    s->add_option("--n-from", sweep.n_from, "Smallest N")->check(CLI::PositiveNumber);
    s->add_option("--n-to", sweep.n_to, "Largest N")->check(CLI::PositiveNumber);
    s->add_option("--points", sweep.points, "Grid points")->check(CLI::Range(2, 100000));
    s->add_flag("--chi3-in-total", sweep.chi3_in_total, "Include the chi3 term in the total");

    auto* w = app.add_subcommand("waist-sweep", "Minimum rms per photon against L/w0");
    add_common(w, common);
    w->add_option("--w0-from", waist.w0_from, "Smallest waist, um (default: half the preset)");
    w->add_option("--w0-to", waist.w0_to, "Largest waist, um (default: twice the preset)");
    w->add_option("--points", waist.points, "Grid points, evenly spaced in L/w0")->check(CLI::Range(2, 10000));

    auto* g = app.add_subcommand("gating", "Gating function, phase matching and damping over frequency");
    add_common(g, common);
    g->add_option("--nu-from", gating.nu_from, "Lowest frequency, THz");
    g->add_option("--nu-to", gating.nu_to, "Highest frequency, THz (default: window edge within the dispersion range)");
    g->add_option("--points", gating.points, "Grid points")->check(CLI::Range(2, 1000000));

    auto* c = app.add_subcommand("correlate", "Two-channel correlation trace, per term and total");
    add_common(c, common);
    c->add_option("--photons", corr.photons, "Probe photon number N")->check(CLI::PositiveNumber);
    c->add_option("--tau-max-fs", corr.tau_max_fs, "Largest delay, fs")->check(CLI::PositiveNumber);
    c->add_option("--points", corr.points, "Delay points from 0")->check(CLI::Range(2, 100000));
    c->add_flag("--half-photons", corr.half_photons, "Give each channel N/2 instead of N");
    c->add_flag("--absorption", corr.absorption, "Apply the MIR damping to the gating functions");

    auto* x = app.add_subcommand("chi3", "Cascaded chi3 shot-noise enhancement per N^3");
    add_common(x, common);
    x->add_option("--X", chi3.X, "Third-order susceptibility, m^2/V^2")->check(CLI::NonNegativeNumber);

    auto* o = app.add_subcommand("oracle", "Truncated Fock-space evaluation of the three-mode model (JSON)");
    add_common(o, common, false);
    o->add_option("--alpha", oracle.alpha, "Real coherent amplitude of each probe");
    o->add_option("--A-re", oracle.A_re, "Re of the down-conversion coupling");
    o->add_option("--A-im", oracle.A_im, "Im of the down-conversion coupling");
    o->add_option("--C-re", oracle.C_re, "Re of the frequency-conversion coupling");
    o->add_option("--C-im", oracle.C_im, "Im of the frequency-conversion coupling");
    o->add_option("--cutoffs", oracle.cutoffs, "Per-mode photon cutoffs")->delimiter(',');
    o->add_option("--channels", oracle.channels, "1 or 2")->check(CLI::IsMember({1, 2}));
    o->add_flag("--exact", oracle.exact, "Also evolve with the full exponential (one channel)");

    auto* t = app.add_subcommand("selftest", "Identity and symmetry checks; nonzero exit on failure");
    add_common(t, common, false);

    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
            err << "run 'eos " << sub->get_name() << " --help' for usage\n";
        else
            err << "run 'eos --help' for usage\n";
        return kUsageError;
    }

    // Help requested on a subcommand is handled above; argument checks that need values happen here.
    try {
        if (*s)
            cmd_sweep(common, sweep, out);
        else if (*w)
            cmd_waist(common, waist, out);
        else if (*g)
            cmd_gating(common, gating, out);
        else if (*c)
            cmd_correlate(common, corr, out);
        else if (*x)
            cmd_chi3(common, chi3, out);
        else if (*o)
            cmd_oracle(common, oracle, out);
        else if (*t)
            return cmd_selftest(common, out);
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kComputationError;
    }
    return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"eos"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace eos::cli
