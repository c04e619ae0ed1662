#include "eos/single_channel.hpp"

#include "eos/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace eos {

namespace {

const double kSqrt3 = std::sqrt(3.0);
const double kSqrt2 = std::sqrt(2.0);
const double kSqrt5 = std::sqrt(5.0);

// Sum over t of R_0^(t)(W), given P(W).
cplx sum_R0(double Omega, cplx P, const KernelContext& ctx) {
    const cplx o = overlap_O(Omega, false, 0.0, 0.0, Sign::Plus, ctx) + overlap_O(Omega, false, 0.0, 0.0, Sign::Minus, ctx);
    return 0.5 * P * gating_absorption(Omega, ctx) * o;
}

cplx sum_W0(double Omega, double Omega2, const KernelContext& ctx) {
    return overlap_W(Omega, Omega2, false, 0.0, 0.0, Sign::Plus, ctx) +
           overlap_W(Omega, Omega2, false, 0.0, 0.0, Sign::Minus, ctx);
}

} // namespace

std::string term_name(VarTerm t) {
    switch (t) {
    case VarTerm::S0S0:
        return "S0S0";
    case VarTerm::S1S1:
        return "S1S1";
    case VarTerm::S2S0:
        return "S2S0";
    case VarTerm::S2SQ:
        return "S2SQ";
    case VarTerm::S3S1:
        return "S3S1";
    case VarTerm::S4S0:
        return "S4S0";
    case VarTerm::CHI3:
        return "CHI3";
    }
    return "?";
}

int term_power(VarTerm t) {
    switch (t) {
    case VarTerm::S0S0:
        return 1;
    case VarTerm::S1S1:
    case VarTerm::S2S0:
        return 2;
    default:
        return 3;
    }
}

namespace integrand {

cplx s2sq(double Omega, double Omega2, const KernelContext& ctx) {
    const cplx P = phase_matching(Omega, ctx);
    const cplx P2 = phase_matching(Omega2, ctx);
    const cplx R2 = gating_R(Omega2, ctx);
    const cplx W = overlap_W(Omega, Omega2, false, 0.0, 0.0, Sign::Plus, ctx);
    return Omega * Omega2 * std::conj(R2) * std::conj(P) * P2 * sum_R0(Omega, P, ctx) * W / ctx.omega_p();
}

cplx s3s1(double Omega, double Omega2, const KernelContext& ctx) {
    const cplx P = phase_matching(Omega, ctx);
    const cplx P2 = phase_matching(Omega2, ctx);
    const cplx R2 = gating_R(Omega2, ctx);
    return Omega * Omega2 * std::conj(R2) * std::conj(P) * P2 * sum_R0(Omega, P, ctx) * sum_W0(Omega, Omega2, ctx) *
           index_ratio(Omega2, ctx) / ctx.omega_p();
}

cplx s4s0(double Omega, double Omega2, const KernelContext& ctx) {
    const cplx P = phase_matching(Omega, ctx);
    const cplx P2 = phase_matching(Omega2, ctx);
    const cplx R0p = 0.5 * P2 * gating_absorption(Omega2, ctx) * overlap_O(Omega2, false, 0.0, 0.0, Sign::Plus, ctx);
    return Omega * Omega2 * std::conj(R0p) * std::conj(P) * P2 * sum_R0(Omega, P, ctx) * sum_W0(Omega, Omega2, ctx) /
           ctx.omega_p();
}

} // namespace integrand

TermResult var_base_shot(double N) {
    if (!(N > 0.0))
        throw std::invalid_argument("photon number must be positive");
    TermResult t;
    t.value = N;
    return t;
}

TermResult var_S1(double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    auto h = [&](double W) -> cplx {
        const cplx R = gating_R(W, ctx);
        return W * index_ratio(W, ctx) * std::norm(R);
    };
    return to_term(integrate_one_sided(h, ctx, cfg), coeff_C(1, N, ctx));
}

TermResult var_S2_S0(double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    // i zeta f- / (d L w / 2 c0 n) = P f-.
    auto h = [&](double W) -> cplx {
        return W * index_ratio(W, ctx) * phase_matching(W, ctx) * probe_overlap(W, Sign::Minus, ctx) *
               std::conj(gating_R(W, ctx));
    };
    return to_term(integrate_two_sided(h, ctx, cfg), -2.0 * coeff_C(1, N, ctx) / kSqrt3);
}

TermResult var_S2_sq(double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    const auto dom = pair_domain(ctx, true);
    auto h = [&](double a, double b) { return integrand::s2sq(a, b, ctx); };
    return to_term(integrate_pair(h, dom, cfg), coeff_C(2, N, ctx) / 3.0);
}

TermResult var_S3_S1(double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    const auto dom = pair_domain(ctx, false);
    auto h = [&](double a, double b) { return integrand::s3s1(a, b, ctx); };
    return to_term(integrate_pair(h, dom, cfg), -coeff_C(2, N, ctx) / kSqrt2);
}

TermResult var_S4_S0(double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    const auto dom = pair_domain(ctx, true);
    auto h = [&](double a, double b) { return integrand::s4s0(a, b, ctx); };
    return to_term(integrate_pair(h, dom, cfg), coeff_C(2, N, ctx) / kSqrt5);
}

TermResult chi3_integral(const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    const auto& p = ctx.probe();
    const double lo = p.support_lo(), hi = p.support_hi();
    std::vector<double> kinks{0.0};
    for (double k : ctx.overlap_kinks())
        if (k > 0.0) {
            kinks.push_back(k);
            kinks.push_back(-k);
        }
    std::size_t inner_evals = 0;
    bool inner_ok = true;
    auto G = [&](double w2) -> cplx {
        std::vector<double> cuts(p.knots().begin(), p.knots().end());
        for (double k : kinks)
            cuts.push_back(w2 - k);
        auto f = [&](double w) { return overlap_F(w2 - w, ctx) * p.amplitude(w); };
        auto r = quad::integrate_1d(f, lo, hi, cfg, cuts);
        inner_evals += r.evaluations;
        inner_ok = inner_ok && r.converged;
        return r.value;
    };
    // No NIR dispersion model is configured, so n / n_w' = 1.
    auto h = [&](double w2) { return w2 * std::norm(G(w2)) / p.beta(); };
    const double a = std::max(0.0, 2.0 * lo - hi), b = 2.0 * hi - lo;
    std::vector<double> cuts{lo, hi};
    for (double k : kinks) {
        cuts.push_back(lo + k);
        cuts.push_back(hi + k);
    }
    auto r = quad::integrate_1d(h, a, b, cfg, cuts);
    TermResult t;
    t.value = r.value;
    t.error = r.error_estimate;
    t.converged = r.converged && inner_ok;
    t.evaluations = r.evaluations + inner_evals;
    return t;
}

TermResult var_chi3(double N, const KernelContext& ctx, const Chi3Params& chi3, const quad::QuadratureConfig& cfg) {
    if (!chi3.enabled)
        throw std::invalid_argument("var_chi3 called with the susceptibility term disabled");
    if (chi3.chi3_m2_per_v2 < 0.0)
        throw std::invalid_argument("chi3 magnitude must be non-negative");
    const auto& c = ctx.crystal();
    const double X_pm = chi3.chi3_m2_per_v2 * 1e24; // pm^2/V^2
    const double amp = c.length_um * ctx.omega_p() * X_pm / (c.n * units::c0);
    const double Q = field_factor(ctx);
    const double pre = 4.0 / 3.0 * N * N * N * amp * amp * Q * Q;
    auto t = chi3_integral(ctx, cfg);
    t.value *= pre;
    t.error *= pre;
    return t;
}

double VarianceCoefficients::value(VarTerm t, double N) const {
    return (*this)[t].value * std::pow(N, term_power(t));
}

double VarianceCoefficients::error(VarTerm t, double N) const {
    return (*this)[t].error * std::pow(N, term_power(t));
}

double VarianceCoefficients::total(double N) const {
    double s = 0.0;
    for (auto t : kVarTerms)
        if (t != VarTerm::CHI3 || include_chi3_in_total)
            s += value(t, N);
    return s;
}

double VarianceCoefficients::rms(double N) const {
    const double tot = total(N);
    if (!(tot > 0.0))
        throw std::domain_error("variance total is not positive at N = " + std::to_string(N));
    return std::sqrt(tot) / N;
}

bool VarianceCoefficients::converged() const {
    return std::all_of(unit.begin(), unit.end(), [](const TermResult& t) { return t.converged; });
}

VarianceCoefficients variance_coefficients(const KernelContext& ctx, const BreakdownOptions& opt) {
    VarianceCoefficients c;
    c.include_chi3_in_total = opt.include_chi3_in_total;
    const auto& q = opt.quad;
    parallel_for(kVarTerms.size(), opt.threads, [&](std::size_t i) {
        TermResult r;
        switch (kVarTerms[i]) {
        case VarTerm::S0S0:
            r = var_base_shot(1.0);
            break;
        case VarTerm::S1S1:
            r = var_S1(1.0, ctx, q);
            break;
        case VarTerm::S2S0:
            r = var_S2_S0(1.0, ctx, q);
            break;
        case VarTerm::S2SQ:
            r = var_S2_sq(1.0, ctx, q);
            break;
        case VarTerm::S3S1:
            r = var_S3_S1(1.0, ctx, q);
            break;
        case VarTerm::S4S0:
            r = var_S4_S0(1.0, ctx, q);
            break;
        case VarTerm::CHI3:
            if (opt.chi3.enabled)
                r = var_chi3(1.0, ctx, opt.chi3, q);
            break;
        }
        c.unit[i] = r;
    });
    return c;
}

VarianceBreakdown breakdown(double N, const VarianceCoefficients& c) {
    if (!(N > 0.0))
        throw std::invalid_argument("photon number must be positive");
    VarianceBreakdown b;
    b.N = N;
    b.include_chi3_in_total = c.include_chi3_in_total;
    for (auto t : kVarTerms) {
        const auto i = static_cast<std::size_t>(t);
        b.terms[i] = c.unit[i];
        b.terms[i].value = c.value(t, N);
        b.terms[i].error = c.error(t, N);
        b.terms[i].imag_residue = c.unit[i].imag_residue * std::pow(N, term_power(t));
    }
    b.terms[0].value = N;
    double s = 0.0;
    for (auto t : kVarTerms)
        if (t != VarTerm::CHI3 || b.include_chi3_in_total)
            s += b[t].value;
    b.total = s;
    if (!(s > 0.0))
        throw std::domain_error("variance total is not positive at N = " + std::to_string(N));
    b.rms = std::sqrt(s) / N;
    return b;
}

VarianceBreakdown breakdown(double N, const KernelContext& ctx, const BreakdownOptions& opt) {
    return breakdown(N, variance_coefficients(ctx, opt));
}

NminResult find_Nmin(const std::function<double(double)>& rms, const NminOptions& opt) {
    if (!(opt.N_lo > 0.0) || !(opt.N_hi > opt.N_lo) || opt.samples < 5)
        throw std::invalid_argument("find_Nmin needs 0 < N_lo < N_hi and at least 5 samples");
    NminResult out;
    const double a0 = std::log(opt.N_lo), b0 = std::log(opt.N_hi);
    std::vector<double> xs(opt.samples), ys(opt.samples);
    for (std::size_t i = 0; i < opt.samples; ++i) {
        xs[i] = a0 + (b0 - a0) * static_cast<double>(i) / static_cast<double>(opt.samples - 1);
        ys[i] = rms(std::exp(xs[i]));
    }
    out.evaluations = opt.samples;
    const auto k = static_cast<std::size_t>(std::min_element(ys.begin(), ys.end()) - ys.begin());
    bool unimodal = k > 0 && k + 1 < opt.samples;
    for (std::size_t i = 1; unimodal && i < opt.samples; ++i) {
        const double slack = 1e-12 * std::abs(ys[i - 1]);
        if (i <= k && ys[i] > ys[i - 1] + slack)
            unimodal = false;
        if (i > k && ys[i] < ys[i - 1] - slack)
            unimodal = false;
    }
    if (!unimodal) {
        std::ostringstream s;
        s << "rms per photon is not unimodal with an interior minimum on [" << opt.N_lo << ", " << opt.N_hi
          << "]; samples (N, rms):";
        for (std::size_t i = 0; i < opt.samples; ++i)
            s << " (" << std::exp(xs[i]) << ", " << ys[i] << ")";
        throw BracketError(s.str());
    }

    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = xs[k - 1], b = xs[k + 1];
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = rms(std::exp(c)), fd = rms(std::exp(d));
    out.evaluations += 2;
    const double tol = 0.1 * opt.rel_tol;
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = rms(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = rms(std::exp(d));
        }
        ++out.evaluations;
    }
    const double x = 0.5 * (a + b);
    out.N_min = std::exp(x);
    out.rms_min = rms(out.N_min);
    out.N_error = out.N_min * 0.5 * (b - a);
    return out;
}

NminResult find_Nmin(const VarianceCoefficients& c, const NminOptions& opt) {
    auto base = find_Nmin([&](double N) { return c.rms(N); }, opt);
    // Propagate coefficient uncertainties by one-at-a-time perturbation.
    double var = base.N_error * base.N_error;
    for (auto t : kVarTerms) {
        if (t == VarTerm::S0S0 || c[t].error == 0.0)
            continue;
        if (t == VarTerm::CHI3 && !c.include_chi3_in_total)
            continue;
        VarianceCoefficients bumped = c;
        bumped.unit[static_cast<std::size_t>(t)].value += c[t].error;
        NminOptions o = opt;
        o.N_lo = base.N_min / 10.0;
        o.N_hi = base.N_min * 10.0;
        o.samples = 9;
        const double dN = find_Nmin([&](double N) { return bumped.rms(N); }, o).N_min - base.N_min;
        var += dN * dN;
    }
    base.N_error = std::sqrt(var);
    return base;
}

NminResult find_Nmin(const KernelContext& ctx, const BreakdownOptions& bopt, const NminOptions& opt) {
    return find_Nmin(variance_coefficients(ctx, bopt), opt);
}

std::vector<WaistPoint> waist_sweep(const ParameterSet& base, const std::vector<double>& w0_um,
                                    const BreakdownOptions& bopt, const NminOptions& nopt) {
    for (double w : w0_um)
        if (!(w > 0.0))
            throw std::invalid_argument("waist grid must be positive");
    std::vector<WaistPoint> out(w0_um.size());
    BreakdownOptions inner = bopt;
    inner.threads = 1;
    parallel_for(w0_um.size(), bopt.threads, [&](std::size_t i) {
        ParameterSet p = base;
        p.crystal.w0_um = w0_um[i];
        const KernelContext ctx(p);
        const auto c = variance_coefficients(ctx, inner);
        WaistPoint wp;
        wp.w0_um = w0_um[i];
        wp.L_over_w0 = p.crystal.length_um / w0_um[i];
        wp.nmin = find_Nmin(c, nopt);
        const double N = wp.nmin.N_min;
        wp.rms_total = c.rms(N);
        wp.rms_shot = 1.0 / std::sqrt(N);
        wp.rms_s1 = std::sqrt(c.value(VarTerm::S1S1, N)) / N;
        out[i] = wp;
    });
    return out;
}

double window_doubling_change(const KernelContext& ctx, const BreakdownOptions& opt) {
    ParameterSet p = ctx.params();
    p.crystal.nu_max_thz = std::min(2.0 * p.crystal.nu_max_thz, p.crystal.dispersion.valid_hi_thz);
    const KernelContext wide(p, ctx.path());
    BreakdownOptions o = opt;
    o.chi3.enabled = false;
    const auto a = variance_coefficients(ctx, o);
    const auto b = variance_coefficients(wide, o);
    // Structurally vanishing terms are skipped relative to their same-order partner.
    auto negligible = [&](VarTerm t) {
        if (t == VarTerm::S2S0)
            return std::abs(a[t].value) <= 1e-8 * std::abs(a[VarTerm::S1S1].value);
        if (t == VarTerm::S4S0)
            return std::abs(a[t].value) <= 1e-8 * std::abs(a[VarTerm::S2SQ].value);
        return a[t].value == 0.0;
    };
    double worst = 0.0;
    for (auto t : {VarTerm::S1S1, VarTerm::S2S0, VarTerm::S2SQ, VarTerm::S3S1, VarTerm::S4S0}) {
        if (negligible(t))
            continue;
        worst = std::max(worst, std::abs(b[t].value - a[t].value) / std::abs(a[t].value));
    }
    return worst;
}

} // namespace eos
