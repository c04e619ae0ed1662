#include "eos/kernels.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace eos;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

ParameterSet sawtooth_set1() {
    ParameterSet p = ParameterSet::set1();
    p.probe = ProbeSpectrum::tabulated({{10.0, 0.0}, {160.0, 1.0}}, 1.0);
    return p;
}

// Midpoint rule for int dw alpha(w) alpha(w - a) over the probe support, straight from the
// amplitude function.
double overlap_midpoint(const ProbeSpectrum& p, double a, bool weighted, int n = 200000) {
    const double lo = p.support_lo(), hi = p.support_hi();
    const double h = (hi - lo) / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = lo + (i + 0.5) * h;
        s += (weighted ? w : 1.0) * p.amplitude(w) * p.amplitude(w - a);
    }
    return s * h;
}

} // namespace

TEST_CASE("sinc and heaviside") {
    CHECK(sinc(0.0) == 1.0);
    CHECK_THAT(sinc(1e-9), WithinRel(1.0, 1e-15));
    CHECK_THAT(sinc(2.5), WithinRel(std::sin(2.5) / 2.5, 1e-15));
    CHECK_THAT(sinc(-1e-4), WithinRel(std::sin(1e-4) / 1e-4, 1e-15));
    CHECK(heaviside(0.0) == 0.5);
    CHECK(heaviside(1.0) == 1.0);
    CHECK(heaviside(-1.0) == 0.0);
}

TEST_CASE("kernel K projections") {
    CHECK(kernel_K(0, 3.0, 0.0, 0.0, Sign::Plus) == 1.0);
    CHECK(kernel_K(0, 3.0, 0.0, 0.0, Sign::Minus) == 0.0);
    CHECK_THAT(kernel_K(1, 3.0, 2.0, 0.1, Sign::Plus), WithinRel(std::cos(0.5), 1e-15));
    CHECK_THAT(kernel_K(2, -3.0, 2.0, 0.1, Sign::Minus), WithinRel(std::sin(-0.1), 1e-15));
    CHECK(kernel_K(2, 3.0, 2.0, 0.0, Sign::Plus) == 0.0);
    CHECK_THROWS_AS(kernel_K(3, 0.0, 0.0, 0.0, Sign::Plus), std::invalid_argument);
}

TEST_CASE("phase matching and zeta") {
    const KernelContext ctx(ParameterSet::set1());
    const auto& c = ctx.crystal();
    for (double nu : {20.0, 60.0, 140.0}) {
        const double W = units::omega_from_thz(nu);
        const double x = c.length_um * W / (2.0 * units::c0) * (refractive_index(W, c.dispersion) - c.n_g);
        const cplx want = std::sin(x) / x * std::exp(cplx(0.0, x));
        CHECK_THAT(std::abs(phase_matching(W, ctx) - want), WithinAbs(0.0, 1e-14));
    }
    const double w = ctx.omega_p();
    const cplx z = zeta(w, 0.0, ctx);
    CHECK_THAT(std::abs(z), WithinRel(std::abs(c.d()) * c.length_um * w / (2.0 * units::c0 * c.n), 1e-14));
    // d < 0, so -i d points along +i.
    CHECK_THAT(std::arg(z), WithinRel(pi / 2, 1e-14));
    CHECK(ctx.cache_consistent());
}

TEST_CASE("flat-spectrum overlap is the triangle") {
    const KernelContext ctx(ParameterSet::set1());
    const double dw = ctx.probe().support_hi() - ctx.probe().support_lo();
    for (double frac : {0.0, 0.1, 0.5, 0.9, 1.2}) {
        const double W = frac * dw;
        const double tri = std::max(0.0, 1.0 - frac);
        CHECK_THAT(std::abs(probe_overlap(W, Sign::Minus, ctx) - tri), WithinAbs(0.0, 1e-12));
        CHECK_THAT(std::abs(overlap_F(W, ctx) - tri), WithinAbs(0.0, 1e-12));
    }
    CHECK_THAT(std::abs(gating_R(0.0, ctx)), WithinRel(1.0, 1e-14));
}

TEST_CASE("overlaps agree with midpoint sums of the amplitude") {
    const auto p = sawtooth_set1().probe;
    const KernelContext ctx(sawtooth_set1());
    for (double nu : {0.0, 25.0, 80.0, 140.0}) {
        const double W = units::omega_from_thz(nu);
        CHECK_THAT(probe_overlap(W, Sign::Minus, ctx).real(), WithinAbs(overlap_midpoint(p, W, false), 1e-8));
    }
}

TEST_CASE("closed-form and generic overlap paths agree") {
    const auto& p = ParameterSet::set1().probe;
    const double wp = p.omega_p();
    for (bool weighted : {false, true})
        for (bool trig : {false, true})
            for (Sign s : kSigns)
                for (auto [a, b] : {std::pair{0.0, 0.0}, {150.0, 40.0}, {-300.0, 500.0}, {900.0, -200.0}}) {
                    const double tau = trig ? 0.013 : 0.0;
                    const cplx c = detail::overlap_closed(a, b, weighted, trig, 31.0, tau, s, p);
                    const cplx g = detail::overlap_generic(a, b, weighted, trig, 31.0, tau, s, p);
                    const double scale = weighted ? wp : 1.0;
                    CHECK_THAT(std::abs(c - g), WithinAbs(0.0, 1e-10 * scale));
                }
}

TEST_CASE("R_0 summed over signs reproduces R") {
    for (auto params : {ParameterSet::set1(), ParameterSet::set2(), sawtooth_set1()}) {
        const KernelContext ctx(params);
        const auto segs = ctx.mir_segments();
        const double lo = segs.front().lo, hi = segs.back().hi;
        for (int i = 0; i < 200; ++i) {
            const double W = lo + (hi - lo) * (i + 0.5) / 200.0;
            for (double sgn : {1.0, -1.0}) {
                const cplx R = gating_R(sgn * W, ctx);
                const cplx sum = rgate(sgn * W, 0, 0.0, 0.0, Sign::Plus, ctx) + rgate(sgn * W, 0, 0.0, 0.0, Sign::Minus, ctx);
                CHECK(std::abs(sum - R) <= 1e-10 * std::max(std::abs(R), 1e-300) + 1e-300);
            }
        }
    }
}

TEST_CASE("R is the product of phase matching, overlap and damping") {
    const KernelContext ctx(ParameterSet::set2());
    for (double nu : {0.3, 1.0, 2.0, 2.7}) {
        const double W = units::omega_from_thz(nu);
        const cplx want = phase_matching(W, ctx) * overlap_F(W, ctx) * absorption(W);
        CHECK_THAT(std::abs(gating_R(W, ctx) - want), WithinAbs(0.0, 1e-14));
        // The probe frequency cancels.
        CHECK_THAT(std::abs(gating_R(W, 0.7 * ctx.omega_p(), ctx) - gating_R(W, ctx)), WithinAbs(0.0, 1e-14));
    }
    // Beyond the triangle support the gate closes.
    const double edge = ctx.probe().support_hi() - ctx.probe().support_lo();
    CHECK(std::abs(gating_R(1.01 * edge, ctx)) == 0.0);
}

TEST_CASE("rgate and wgate trig projections") {
    const KernelContext ctx(ParameterSet::set1());
    for (Sign s : kSigns) {
        const double W = 200.0, W2 = -90.0, X = 12.0, tau = 0.021;
        auto [r1, r2] = rgate_trig(W, X, tau, s, ctx);
        CHECK_THAT(std::abs(r1 - rgate(W, 1, X, tau, s, ctx)), WithinAbs(0.0, 1e-13));
        CHECK_THAT(std::abs(r2 - rgate(W, 2, X, tau, s, ctx)), WithinAbs(0.0, 1e-13));
        CHECK_THAT(std::abs(rgate(W, 1, X, 0.0, s, ctx) - rgate(W, 0, 0.0, 0.0, s, ctx)), WithinAbs(0.0, 1e-14));
        CHECK(std::abs(rgate(W, 2, X, 0.0, s, ctx)) == 0.0);
        auto [w1, w2] = wgate_trig(W, W2, X, tau, s, ctx);
        const double scale = ctx.omega_p();
        CHECK_THAT(std::abs(w1 - wgate(W, W2, 1, X, tau, s, ctx)), WithinAbs(0.0, 1e-12 * scale));
        CHECK_THAT(std::abs(w2 - wgate(W, W2, 2, X, tau, s, ctx)), WithinAbs(0.0, 1e-12 * scale));
        CHECK(std::abs(ggate(W, W2, 2, 0, X, 0.0, 0.0, s, Sign::Plus, ctx)) == 0.0);
    }
}

TEST_CASE("W_0 at the origin gives the signed mean frequency") {
    const KernelContext ctx(ParameterSet::set1());
    const double wc = units::omega_from_thz(ctx.probe().center_thz());
    CHECK_THAT(wgate(0.0, 0.0, 0, 0.0, 0.0, Sign::Plus, ctx).real(), WithinRel(wc, 1e-12));
    CHECK_THAT(wgate(0.0, 0.0, 0, 0.0, 0.0, Sign::Minus, ctx).real(), WithinRel(-wc, 1e-12));
    // Direct midpoint weighted overlap on the sawtooth.
    const auto saw = sawtooth_set1();
    const KernelContext sc(saw);
    for (double W : {0.0, 150.0, 400.0}) {
        const double want = overlap_midpoint(saw.probe, W, true);
        CHECK_THAT(wgate(W, 0.0, 0, 0.0, 0.0, Sign::Plus, sc).real(), WithinRel(want, 1e-7));
    }
}

TEST_CASE("transverse overlap constants") {
    CHECK_THAT(overlap_A(2, 1.0), WithinRel(2.0 / std::sqrt(3.0 * pi * pi), 1e-15));
    CHECK_THAT(overlap_A(3, 1.0), WithinRel(std::sqrt(2.0 / (pi * pi * pi)), 1e-15));
    CHECK_THAT(overlap_A(4, 1.0), WithinRel(4.0 / (std::sqrt(5.0) * pi * pi), 1e-15));
    CHECK_THAT(overlap_A(2, 6.0) / overlap_A(2, 3.0), WithinRel(0.25, 1e-15));
    CHECK_THAT(overlap_A(3, 6.0) / overlap_A(3, 3.0), WithinRel(0.125, 1e-15));
    CHECK_THROWS_AS(overlap_A(5, 1.0), std::invalid_argument);
}

TEST_CASE("C_1 in internal units equals the SI evaluation") {
    const auto params = ParameterSet::set1();
    const KernelContext ctx(params);
    const auto& c = params.crystal;
    const auto& k = kConstants;
    // Everything in SI: L and w0 in m, omega_p in rad/s, r41 in m/V.
    const double L = c.length_um * 1e-6, w0 = c.w0_um * 1e-6;
    const double wp = ctx.omega_p() * 1e12, r41 = c.r41_pm_per_v * 1e-12;
    const double amp = c.n * c.n * c.n * L * wp * r41 / k.c0;
    const double N = 1e10;
    const double C1_si = N * N * amp * amp * k.hbar / (4.0 * pi * pi * k.eps0 * k.c0 * c.n * w0 * w0); // s^2
    CHECK_THAT(coeff_C(1, N, ctx) * 1e-24, WithinRel(C1_si, 1e-12));
    CHECK_THAT(coeff_C(2, N, ctx) / (coeff_C(1, N, ctx) * coeff_C(1, N, ctx)), WithinRel(1.0 / N, 1e-13));
    CHECK_THAT(coeff_C(2, 2.0 * N, ctx) / coeff_C(2, N, ctx), WithinRel(8.0, 1e-13));
}

TEST_CASE("integration segments respect window and support") {
    const KernelContext c1(ParameterSet::set1());
    const auto s1 = c1.mir_segments();
    CHECK_THAT(s1.front().lo, WithinRel(units::omega_from_thz(18.0), 1e-14));
    CHECK_THAT(s1.back().hi, WithinRel(units::omega_from_thz(150.0), 1e-14));
    const KernelContext c2(ParameterSet::set2());
    const auto s2 = c2.mir_segments();
    CHECK(s2.front().lo == 0.0);
    CHECK(s2.back().hi <= c2.probe().support_hi() - c2.probe().support_lo() + 1e-12);
}
