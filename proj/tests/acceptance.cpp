// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include "eos/fock.hpp"
#include "eos/integrate.hpp"
#include "eos/kernels.hpp"
#include "eos/single_channel.hpp"
#include "eos/two_channel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace eos;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
    fmt::print("{} {:2d} {}: {}\n", ok ? "PASS" : "FAIL", id, what, detail);
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ParameterSet sawtooth_set1() {
    ParameterSet p = ParameterSet::set1();
    p.probe = ProbeSpectrum::tabulated({{10.0, 0.0}, {160.0, 1.0}}, 1.0);
    return p;
}

double loglog_slope(const std::function<double(double)>& f, double a, double b) {
    const int n = 5;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(a) + (std::log(b) - std::log(a)) * i / (n - 1);
        const double y = std::log(std::abs(f(std::exp(x))));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct LinearFit {
    double slope = 0.0;
    double r2 = 0.0;
};

LinearFit fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double cxy = sxy - sx * sy / n, cxx = sxx - sx * sx / n, cyy = syy - sy * sy / n;
    return {cxy / cxx, cxy * cxy / (cxx * cyy)};
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

// ---------------------------------------------------------------- 1, 2, 9

void nmin_and_shot_noise() {
    const struct {
        ParameterSet p;
        double want;
    } cases[] = {{ParameterSet::set1(), 1.6e11}, {ParameterSet::set2(), 6.4e11}};
    bool ok1 = true, ok2 = true;
    std::string d1, d2;
    for (const auto& c : cases) {
        const auto t0 = std::chrono::steady_clock::now();
        const KernelContext ctx(c.p);
        const auto r = find_Nmin(ctx);
        const double dt = seconds_since(t0);
        const double rel = r.N_min / c.want - 1.0;
        ok1 = ok1 && std::abs(rel) <= 0.2 && dt <= 300.0;
        d1 += fmt::format("{}N_min {:.4e} ({:+.1f}% vs {:.1e}, {:.2f} s)", d1.empty() ? "" : "; ", r.N_min,
                          100.0 * rel, c.want, dt);

        const auto coeff = variance_coefficients(ctx);
        double worst = 0.0;
        for (double N : {1.0, 1e2, 1e4, 1e5, 1e6})
            worst = std::max(worst, std::abs(coeff.rms(N) * std::sqrt(N) - 1.0));
        ok2 = ok2 && worst <= 0.01;
        d2 += fmt::format("{}max |rms sqrt(N) - 1| = {:.2e}", d2.empty() ? "" : "; ", worst);
    }
    report(1, ok1, "N_min within 20% and under 5 min", d1);
    report(2, ok2, "shot-noise law to 1% for N <= 1e6", d2);
}

void chi3_anchor() {
    const KernelContext ctx(ParameterSet::set1());
    const double v = var_chi3(1.0, ctx).value;
    report(9, v >= 1e-22 && v <= 1e-20, "var_chi3 / N^3 in [1e-22, 1e-20] on set 1", fmt::format("{:.4e}", v));
}

// ---------------------------------------------------------------- 3

void scaling_exponents() {
    const double a = 1e8, b = 1e10;
    bool ok = true;
    double worst = 0.0;
    std::string bad;
    auto check = [&](const std::string& name, double want, const std::function<double(double)>& f) {
        const double s = loglog_slope(f, a, b);
        const double e = std::abs(s - want);
        worst = std::max(worst, e);
        if (!(e <= 1e-3)) {
            ok = false;
            bad += fmt::format(" {}={:.5f}", name, s);
        }
    };
    for (const auto& p : {ParameterSet::set1(), ParameterSet::set2()}) {
        const KernelContext ctx(p);
        const auto c = variance_coefficients(ctx);
        // Terms evaluated directly at each N, not through stored coefficients.
        check("S1S1", 2.0, [&](double N) { return var_S1(N, ctx).value; });
        check("S2SQ", 3.0, [&](double N) { return var_S2_sq(N, ctx).value; });
        check("S3S1", 3.0, [&](double N) { return var_S3_S1(N, ctx).value; });
        check("CHI3", 3.0, [&](double N) { return var_chi3(N, ctx).value; });
        check("S1S1 breakdown", 2.0, [&](double N) { return breakdown(N, c)[VarTerm::S1S1].value; });
    }
    const auto tc = two_channel_context(ParameterSet::set1());
    const auto saw = two_channel_context(sawtooth_set1());
    const double tau = 25.0;
    for (CorrTerm t : kCorrTerms) {
        if (t == CorrTerm::CROSS2)
            continue;
        // V04A and V04B vanish for the flat spectrum; their scaling is checked where they do not.
        const bool odd = t == CorrTerm::V04A || t == CorrTerm::V04B;
        const KernelContext& ctx = odd ? saw : tc;
        check(term_name(t), term_power(t), [&](double N) { return corr_term(t, tau, N, ctx).value; });
    }
    report(3, ok, "log-log exponents over [1e8, 1e10] within 1e-3",
           fmt::format("max deviation {:.2e}{}", worst, bad.empty() ? "" : ";" + bad));
}

// ---------------------------------------------------------------- 4

void symmetry_vanishing() {
    bool ok = true;
    double worst_flat = 0.0, weakest_saw = 1e300;
    const std::vector<double> taus{0.0, 50.0, 200.0};
    for (const auto& p : {ParameterSet::set1(), ParameterSet::set2()}) {
        const KernelContext ctx(p);
        const auto c = variance_coefficients(ctx);
        const double r20 = std::abs(c[VarTerm::S2S0].value) / c[VarTerm::S1S1].value;
        const double r40 = std::abs(c[VarTerm::S4S0].value) / std::abs(c[VarTerm::S2SQ].value);
        worst_flat = std::max({worst_flat, r20, r40});

        const auto tc = two_channel_context(p);
        const double main0 = std::abs(g2_main(0.0, 1.0, tc).value);
        const double v0 = std::abs(v22(0.0, 1.0, 'a', tc).value);
        for (double tau : taus) {
            worst_flat = std::max(worst_flat, std::abs(g2_cross_nir(tau, 1.0, tc).value) / main0);
            worst_flat = std::max(worst_flat, std::abs(v04(tau, 1.0, 'a', tc).value) / v0);
            worst_flat = std::max(worst_flat, std::abs(v04(tau, 1.0, 'b', tc).value) / v0);
        }
    }
    ok = worst_flat < 1e-8;

    const KernelContext saw(sawtooth_set1());
    const auto c = variance_coefficients(saw);
    weakest_saw = std::min(std::abs(c[VarTerm::S2S0].value) / c[VarTerm::S1S1].value,
                           std::abs(c[VarTerm::S4S0].value) / std::abs(c[VarTerm::S2SQ].value));
    const auto tc = two_channel_context(sawtooth_set1());
    const double main0 = std::abs(g2_main(0.0, 1.0, tc).value), v0 = std::abs(v22(0.0, 1.0, 'a', tc).value);
    weakest_saw = std::min({weakest_saw, std::abs(g2_cross_nir(0.0, 1.0, tc).value) / main0,
                            std::abs(v04(0.0, 1.0, 'a', tc).value) / v0, std::abs(v04(0.0, 1.0, 'b', tc).value) / v0});
    ok = ok && weakest_saw > 1e-3;
    report(4, ok, "S2S0, S4S0, CROSS2, V04A, V04B vanish for flat spectra and not for the sawtooth",
           fmt::format("flat max ratio {:.2e}; sawtooth min ratio {:.2e}", worst_flat, weakest_saw));
}

// ---------------------------------------------------------------- 5

void kernel_identity() {
    double worst = 0.0;
    for (const auto& p : {ParameterSet::set1(), ParameterSet::set2(), sawtooth_set1()}) {
        const KernelContext ctx(p);
        const auto segs = ctx.mir_segments();
        const double lo = segs.front().lo, hi = segs.back().hi;
        for (int i = 0; i < 200; ++i) {
            const double W = lo + (hi - lo) * i / 199.0;
            for (double sgn : {1.0, -1.0}) {
                const cplx R = gating_R(sgn * W, ctx);
                const cplx sum =
                    rgate(sgn * W, 0, 0.0, 0.0, Sign::Plus, ctx) + rgate(sgn * W, 0, 0.0, 0.0, Sign::Minus, ctx);
                if (std::abs(R) > 0.0)
                    worst = std::max(worst, std::abs(sum - R) / std::abs(R));
                else
                    worst = std::max(worst, std::abs(sum));
            }
        }
    }
    report(5, worst <= 1e-10, "sum over signs of R_0 equals R on 200 points", fmt::format("max rel {:.2e}", worst));
}

// ---------------------------------------------------------------- 6

void zero_delay() {
    double worst = 0.0;
    for (const auto& p : {ParameterSet::set1(), ParameterSet::set2()}) {
        const auto ctx = two_channel_context(p);
        const double a = v22(0.0, 1.0, 'a', ctx).value, s22 = var_S2_sq(1.0, ctx).value;
        const double b = v13(0.0, 1.0, 'a', ctx).value, s31 = var_S3_S1(1.0, ctx).value;
        worst = std::max({worst, std::abs(a / (2.0 * s22) - 1.0), std::abs(b / (2.0 * s31) - 1.0)});
    }
    report(6, worst <= 1e-6, "V22A(0) = 2 S2SQ and V13A(0) = 2 S3S1", fmt::format("max rel {:.2e}", worst));
}

// ---------------------------------------------------------------- 7, 8

double mean_probed_frequency(const KernelContext& ctx) {
    quad::QuadratureConfig q;
    q.rel_tol = 1e-10;
    auto w = [&](double W) { return W * std::norm(gating_R(W, ctx)); };
    const auto num = integrate_one_sided([&](double W) { return cplx(W * w(W)); }, ctx, q);
    const auto den = integrate_one_sided([&](double W) { return cplx(w(W)); }, ctx, q);
    return num.value.real() / den.value.real();
}

// First zero crossing after the central maximum, linearly interpolated.
double first_crossing(const std::vector<double>& tau, const std::vector<double>& g) {
    for (std::size_t i = 1; i < g.size(); ++i)
        if ((g[i - 1] > 0.0) != (g[i] > 0.0))
            return tau[i - 1] + (tau[i] - tau[i - 1]) * g[i - 1] / (g[i - 1] - g[i]);
    return std::nan("");
}

void correlation_checks() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ctx = two_channel_context(ParameterSet::set2());
    TwoChannelConfig cfg;
    const auto unit = correlation_trace(1.0, ctx, cfg);

    const auto hi = unit.rescaled(1e11, ctx), lo = unit.rescaled(1e8, ctx);
    const double r_hi = max_abs(hi.g_total_4th()) / max_abs(hi.g_total_2nd());
    const double r_lo = max_abs(lo.g_total_4th()) / max_abs(lo.g_total_2nd());
    report(7, r_hi >= 0.1 && r_hi <= 10.0 && r_lo <= 1e-2 && unit.all_converged(),
           "fourth/second-order peak ratio on set 2",
           fmt::format("N=1e11: {:.3f}; N=1e8: {:.2e}; trace {:.1f} s", r_hi, r_lo, seconds_since(t0)));

    // The crossings at +-tau_1 around the central peak are half a period apart.
    const auto main = unit.values(CorrTerm::MAIN2);
    const double tau1 = first_crossing(unit.tau_fs, main);
    const double period = 4.0 * tau1;
    const double want = 2.0 * std::numbers::pi / mean_probed_frequency(ctx) * 1000.0;
    report(8, std::abs(period / want - 1.0) <= 0.1, "MAIN2 oscillation period vs 2 pi / <W>",
           fmt::format("crossing period {:.1f} fs vs {:.1f} fs ({:+.1f}%)", period, want,
                       100.0 * (period / want - 1.0)));
}

// ---------------------------------------------------------------- 10

void fock_oracle() {
    using namespace fock;
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(-1.0, 1.0), ua(0.3, 1.5), ua2(0.3, 0.9);
    auto coupling = [&] { return 0.05 * cplx(u(rng), u(rng)); };
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        ThreeModeModel m;
        m.A = coupling();
        m.C = coupling();
        m.alpha = ua(rng);
        const auto pc = perturbative_components(m);
        const auto hv = heisenberg_variances(m);
        namespace cf = closed_form;
        for (auto [x, y] : {std::pair{perturbative_variance(m), cf::variance(m.A, m.C, m.alpha)},
                            {pc.sig1_sq, cf::sig1_sq(m.A, m.alpha)},
                            {hv.S1_sq, cf::S1_sq(m.A, m.C, m.alpha)},
                            {hv.S2S0_sym, cf::S2S0_sym(m.A, m.C, m.alpha)}})
            worst = std::max(worst, std::abs(x - y));

        ThreeModeModel t;
        t.channels = 2;
        t.A = coupling();
        t.C = coupling();
        t.A2 = coupling();
        t.C2 = coupling();
        t.alpha = ua2(rng);
        t.alpha2 = ua2(rng);
        const auto o = two_channel_oracle(t);
        worst = std::max(worst, std::abs(o.cross_sig1 - cf::cross_sig1(t.A, t.A2, t.alpha, t.alpha2)));
        worst = std::max(worst, std::abs(o.cross_sig02 - cf::cross_sig02(t.A, t.A2, t.C, t.C2, t.alpha, t.alpha2)));
    }
    ThreeModeModel m;
    m.A = {0.08, 0.03};
    m.C = {-0.05, 0.06};
    m.alpha = 1.2;
    auto residual = [&](double s) {
        ThreeModeModel q = m;
        q.A *= s;
        q.C *= s;
        return std::abs(exact_variance(q).variance - perturbative_variance(q));
    };
    const double shrink = residual(1.0) / residual(0.5);
    report(10, worst <= 1e-10 && shrink >= 8.0, "Fock closed forms on 100 random models; residual shrink",
           fmt::format("max abs deviation {:.2e}; residual ratio {:.2f}", worst, shrink));
}

// ---------------------------------------------------------------- 11

void waist_linearity() {
    bool ok = true;
    std::string d;
    for (const auto& p : {ParameterSet::set1(), ParameterSet::set2()}) {
        std::vector<double> w0;
        for (int i = 0; i < 16; ++i)
            w0.push_back(p.crystal.w0_um * std::pow(4.0, i / 15.0) / 2.0);
        const auto pts = waist_sweep(p, w0);
        std::vector<double> x, tot, sn, s1;
        for (const auto& w : pts) {
            x.push_back(w.L_over_w0);
            tot.push_back(w.rms_total);
            sn.push_back(w.rms_shot);
            s1.push_back(w.rms_s1);
        }
        const auto ft = fit(x, tot), fs = fit(x, sn), fm = fit(x, s1);
        ok = ok && ft.r2 > 0.99 && ft.slope > fs.slope && ft.slope > fm.slope;
        d += fmt::format("{}R2 {:.5f}, slopes total {:.3e} / SN {:.3e} / main {:.3e}", d.empty() ? "" : "; ", ft.r2,
                         ft.slope, fs.slope, fm.slope);
    }
    report(11, ok, "rms at N_min linear in L/w0", d);
}

// ---------------------------------------------------------------- 12

void tolerance_halving() {
    bool ok = true;
    std::size_t n = 0;
    double worst = 0.0;
    std::string bad;
    auto check = [&](const std::string& name, double a, double b, double err) {
        ++n;
        const double diff = std::abs(a - b);
        if (err > 0.0)
            worst = std::max(worst, diff / err);
        if (!(diff <= err)) {
            ok = false;
            bad += fmt::format(" {} (diff {:.2e} > err {:.2e})", name, diff, err);
        }
    };
    for (const auto& p : {ParameterSet::set1(), ParameterSet::set2()}) {
        const KernelContext ctx(p);
        BreakdownOptions a, b;
        b.quad.rel_tol = a.quad.rel_tol / 2.0;
        const auto ca = variance_coefficients(ctx, a), cb = variance_coefficients(ctx, b);
        for (VarTerm t : kVarTerms)
            check(term_name(t), ca[t].value, cb[t].value, ca[t].error);
        const auto na = find_Nmin(ca), nb = find_Nmin(cb);
        check("N_min", na.N_min, nb.N_min, na.N_error);
    }
    const auto ctx = two_channel_context(ParameterSet::set2());
    TwoChannelConfig a;
    a.tau_fs = {0.0, 100.0, 250.0, 500.0, 1000.0};
    TwoChannelConfig b = a;
    b.quad.rel_tol = a.quad.rel_tol / 2.0;
    const auto ta = correlation_trace(1.0, ctx, a), tb = correlation_trace(1.0, ctx, b);
    for (CorrTerm t : kCorrTerms) {
        const auto i = static_cast<std::size_t>(t);
        for (std::size_t k = 0; k < a.tau_fs.size(); ++k)
            check(fmt::format("{}({})", term_name(t), a.tau_fs[k]), ta.unit[i][k], tb.unit[i][k], ta.unit_error[i][k]);
    }
    report(12, ok, "halving rel_tol moves every quantity by at most its error estimate",
           fmt::format("{} quantities, max diff/err {:.2e}{}", n, worst, bad));
}

} // namespace

int main() {
    nmin_and_shot_noise();
    scaling_exponents();
    symmetry_vanishing();
    kernel_identity();
    zero_delay();
    correlation_checks();
    chi3_anchor();
    fock_oracle();
    waist_linearity();
    tolerance_halving();
    fmt::print("{} of 12 criteria failed\n", failures);
    return failures ? 1 : 0;
}
