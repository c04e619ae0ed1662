#include "eos/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eos {

namespace {

constexpr cplx I{0.0, 1.0};

double compute_omega_p(const ProbeSpectrum& p) { return p.kappa() / p.beta(); }

struct Span {
    double lo, hi;
};

// Segments where alpha(w - a) alpha(w - b) can be nonzero, restricted to the half-line s.
int overlap_spans(double a, double b, Sign s, const ProbeSpectrum& p, std::array<Span, 4>& out) {
    const double lo = p.support_lo(), hi = p.support_hi();
    const Span A[2] = {{a + lo, a + hi}, {a - hi, a - lo}};
    const Span B[2] = {{b + lo, b + hi}, {b - hi, b - lo}};
    int k = 0;
    for (const auto& x : A)
        for (const auto& y : B) {
            double l = std::max(x.lo, y.lo);
            double h = std::min(x.hi, y.hi);
            if (s == Sign::Plus)
                l = std::max(l, 0.0);
            else
                h = std::min(h, 0.0);
            if (h > l)
                out[k++] = {l, h};
        }
    return k;
}

// (sin t - t cos t) / t^3.
double g3(double t) {
    if (std::abs(t) < 1e-2) {
        const double t2 = t * t;
        return 1.0 / 3.0 - t2 / 30.0 + t2 * t2 / 840.0 - t2 * t2 * t2 / 45360.0;
    }
    return (std::sin(t) - t * std::cos(t)) / (t * t * t);
}

} // namespace

KernelContext::KernelContext(ParameterSet params, OverlapPath path)
    : params_(std::move(params)), path_(path) {
    params_.validate();
    const bool flat = params_.probe.shape() == ProbeSpectrum::Shape::Rectangular;
    if (path_ == OverlapPath::ClosedForm && !flat)
        throw std::invalid_argument("closed-form overlaps need the flat spectrum");
    closed_form_ = flat && path_ != OverlapPath::Generic;
    d_ = params_.crystal.d();
    omega_p_ = compute_omega_p(params_.probe);
    mismatch_ = params_.crystal.length_um / (2.0 * units::c0);
}

bool KernelContext::cache_consistent() const {
    return d_ == params_.crystal.d() && omega_p_ == compute_omega_p(params_.probe) &&
           mismatch_ == params_.crystal.length_um / (2.0 * units::c0);
}

std::vector<quad::Interval> KernelContext::mir_segments() const { return mir_segments(crystal().nu_max_thz); }

std::vector<quad::Interval> KernelContext::mir_segments(double nu_max_thz) const {
    const double wlo = units::omega_from_thz(crystal().nu_min_thz);
    const double whi = units::omega_from_thz(nu_max_thz);
    const double lo = probe().support_lo(), hi = probe().support_hi();
    std::vector<quad::Interval> support{{0.0, hi - lo}};
    if (2.0 * lo <= hi - lo)
        support[0].hi = 2.0 * hi;
    else
        support.push_back({2.0 * lo, 2.0 * hi});
    std::vector<quad::Interval> out;
    for (const auto& s : support) {
        const double l = std::max(s.lo, wlo), h = std::min(s.hi, whi);
        if (h > l)
            out.push_back({l, h});
    }
    return out;
}

std::vector<double> KernelContext::overlap_kinks() const {
    const double lo = probe().support_lo(), hi = probe().support_hi();
    return {0.0, hi - lo, 2.0 * lo, lo + hi, 2.0 * hi};
}

double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

double heaviside(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5); }

double kernel_K(int i, double omega, double X, double tau, Sign s) {
    const double th = heaviside(s == Sign::Plus ? omega : -omega);
    switch (i) {
    case 0:
        return th;
    case 1:
        return std::cos(tau * (omega + X)) * th;
    case 2:
        return std::sin(tau * (omega + X)) * th;
    default:
        throw std::invalid_argument("kernel index must be 0, 1 or 2");
    }
}

cplx phase_matching(double Omega, const KernelContext& ctx) {
    const double n_mir = refractive_index(Omega, ctx.crystal().dispersion);
    const double x = ctx.mismatch_prefactor() * Omega * (n_mir - ctx.crystal().n_g);
    return sinc(x) * cplx(std::cos(x), std::sin(x));
}

double index_ratio(double Omega, const KernelContext& ctx) {
    return ctx.crystal().n / refractive_index(Omega, ctx.crystal().dispersion);
}

double gating_absorption(double Omega, const KernelContext& ctx) {
    return absorption(Omega, ctx.crystal().absorption_enabled);
}

cplx zeta(double omega, double Omega, const KernelContext& ctx) {
    const double amp = ctx.d() * ctx.mismatch_prefactor() * omega / ctx.crystal().n;
    return -I * amp * phase_matching(Omega, ctx);
}

namespace detail {

cplx overlap_closed(double a, double b, bool weighted, bool trig, double X, double tau, Sign s,
                    const ProbeSpectrum& p) {
    std::array<Span, 4> spans;
    const int k = overlap_spans(a, b, s, p, spans);
    const double h2 = p.knot_values().front() * p.knot_values().front();
    cplx sum = 0.0;
    for (int j = 0; j < k; ++j) {
        const double len = spans[j].hi - spans[j].lo;
        const double m = 0.5 * (spans[j].lo + spans[j].hi);
        if (!trig) {
            sum += weighted ? m * len : len;
            continue;
        }
        const double t = 0.5 * tau * len;
        const double ph = tau * (m + X);
        const cplx e(std::cos(ph), std::sin(ph));
        if (!weighted)
            sum += e * (len * sinc(t));
        else
            sum += e * cplx(m * len * sinc(t), 0.5 * len * len * t * g3(t));
    }
    return h2 * sum;
}

cplx overlap_generic(double a, double b, bool weighted, bool trig, double X, double tau, Sign s,
                     const ProbeSpectrum& p) {
    std::array<Span, 4> spans;
    const int k = overlap_spans(a, b, s, p, spans);
    std::vector<double> cuts;
    for (double kn : p.knots())
        for (double c : {a + kn, a - kn, b + kn, b - kn})
            cuts.push_back(c);
    quad::QuadratureConfig cfg;
    cfg.rel_tol = 1e-13;
    cfg.abs_tol = 1e-16 * std::max(1.0, std::abs(a) + std::abs(b) + p.support_hi());
    cfg.max_subdivisions = 4000;
    auto f = [&](double w) -> cplx {
        const double amp = p.amplitude(w - a) * p.amplitude(w - b) * (weighted ? w : 1.0);
        if (!trig)
            return amp * kernel_K(0, w, X, tau, s);
        return amp * cplx(kernel_K(1, w, X, tau, s), kernel_K(2, w, X, tau, s));
    };
    cplx sum = 0.0;
    for (int j = 0; j < k; ++j)
        sum += quad::integrate_1d(f, spans[j].lo, spans[j].hi, cfg, cuts).value;
    return sum;
}

} // namespace detail

namespace {

cplx overlap(double a, double b, bool weighted, bool trig, double X, double tau, Sign s, const KernelContext& ctx) {
    const auto& p = ctx.probe();
    const cplx v = ctx.closed_form() ? detail::overlap_closed(a, b, weighted, trig, X, tau, s, p)
                                     : detail::overlap_generic(a, b, weighted, trig, X, tau, s, p);
    return v / p.kappa();
}

} // namespace

cplx overlap_O(double Omega, bool trig, double X, double tau, Sign s, const KernelContext& ctx) {
    return overlap(0.0, Omega, false, trig, X, tau, s, ctx);
}

cplx overlap_W(double Omega, double Omega2, bool trig, double X, double tau, Sign s, const KernelContext& ctx) {
    return overlap(Omega, Omega2, true, trig, X, tau, s, ctx);
}

cplx probe_overlap(double Omega, Sign s, const KernelContext& ctx) {
    // f-(W) pairs alpha(w) with alpha(w - W), f+(W) with alpha(w + W); both over w > 0.
    const double b = s == Sign::Minus ? Omega : -Omega;
    return overlap(0.0, b, false, false, 0.0, 0.0, Sign::Plus, ctx);
}

cplx overlap_F(double Omega, const KernelContext& ctx) {
    return 0.5 * (std::conj(probe_overlap(Omega, Sign::Plus, ctx)) + probe_overlap(Omega, Sign::Minus, ctx));
}

cplx gating_R(double Omega, double omega, const KernelContext& ctx) {
    const double norm = ctx.d() * ctx.mismatch_prefactor() * omega / ctx.crystal().n;
    return I * zeta(omega, Omega, ctx) * overlap_F(Omega, ctx) / norm * gating_absorption(Omega, ctx);
}

cplx gating_R(double Omega, const KernelContext& ctx) { return gating_R(Omega, ctx.omega_p(), ctx); }

cplx rgate(double Omega, int i, double X, double tau, Sign s, const KernelContext& ctx) {
    if (i < 0 || i > 2)
        throw std::invalid_argument("rgate index must be 0, 1 or 2");
    const cplx pre = 0.5 * phase_matching(Omega, ctx) * gating_absorption(Omega, ctx);
    if (i == 0)
        return pre * overlap(0.0, Omega, false, false, 0.0, 0.0, s, ctx);
    const cplx e = overlap(0.0, Omega, false, true, X, tau, s, ctx);
    return pre * (i == 1 ? e.real() : e.imag());
}

std::pair<cplx, cplx> rgate_trig(double Omega, double X, double tau, Sign s, const KernelContext& ctx) {
    const cplx pre = 0.5 * phase_matching(Omega, ctx) * gating_absorption(Omega, ctx);
    const cplx e = overlap(0.0, Omega, false, true, X, tau, s, ctx);
    return {pre * e.real(), pre * e.imag()};
}

cplx wgate(double Omega, double Omega2, int i, double X, double tau, Sign s, const KernelContext& ctx) {
    if (i < 0 || i > 2)
        throw std::invalid_argument("wgate index must be 0, 1 or 2");
    if (i == 0)
        return overlap(Omega, Omega2, true, false, 0.0, 0.0, s, ctx);
    const cplx e = overlap(Omega, Omega2, true, true, X, tau, s, ctx);
    return i == 1 ? e.real() : e.imag();
}

std::pair<cplx, cplx> wgate_trig(double Omega, double Omega2, double X, double tau, Sign s,
                                 const KernelContext& ctx) {
    const cplx e = overlap(Omega, Omega2, true, true, X, tau, s, ctx);
    return {e.real(), e.imag()};
}

cplx ggate(double Omega, double Omega2, int i, int j, double X, double Y, double tau, Sign s, Sign s2,
           const KernelContext& ctx) {
    const double wp = ctx.omega_p();
    const double pre = ctx.d() * ctx.mismatch_prefactor() * wp * std::sqrt(wp) / ctx.crystal().n;
    const cplx zz = std::conj(zeta(wp, Omega, ctx)) * zeta(wp, Omega2, ctx) / (pre * pre);
    return zz * rgate(Omega, i, X, tau, s, ctx) * wgate(Omega, Omega2, j, Y, tau, s2, ctx);
}

double overlap_A(int j, double w0) {
    constexpr double pi = std::numbers::pi;
    switch (j) {
    case 2:
        return 2.0 / std::sqrt(3.0 * pi * pi) / (w0 * w0);
    case 3:
        return std::sqrt(2.0 / (pi * pi * pi)) / (w0 * w0 * w0);
    case 4:
        return 4.0 / (std::sqrt(5.0) * pi * pi * w0 * w0);
    default:
        throw std::invalid_argument("overlap_A is defined for j = 2, 3, 4");
    }
}

double eo_amplitude(const KernelContext& ctx) {
    const auto& c = ctx.crystal();
    return c.n * c.n * c.n * c.length_um * ctx.omega_p() * c.r41_pm_per_v / units::c0;
}

double field_factor(const KernelContext& ctx) {
    const auto& k = kConstants;
    const double w0 = ctx.crystal().w0_um * 1e-6;
    return k.hbar / (4.0 * std::numbers::pi * std::numbers::pi * k.eps0 * k.c0 * ctx.crystal().n * w0 * w0);
}

double coeff_C(int jj, double N, const KernelContext& ctx) {
    if (jj < 1)
        throw std::invalid_argument("coeff_C needs jj >= 1");
    const double a = eo_amplitude(ctx);
    const double per = a * a * field_factor(ctx);
    return std::pow(N, jj + 1) * std::pow(per, jj);
}

} // namespace eos
