#include "eos/two_channel.hpp"

#include "eos/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace eos {

namespace {

constexpr double kFsPerPs = 1000.0;

bool is_2d(CorrTerm t) { return t != CorrTerm::MAIN2 && t != CorrTerm::CROSS2; }

// W' restricted to W' >= 0 for the V13 family.
bool second_two_sided(CorrTerm t) { return t != CorrTerm::V13A && t != CorrTerm::V13B; }

double prefactor(CorrTerm t, double N, const KernelContext& ctx) {
    switch (t) {
    case CorrTerm::MAIN2:
        return coeff_C(1, N, ctx);
    case CorrTerm::CROSS2:
        return -2.0 * coeff_C(1, N, ctx) / std::sqrt(3.0);
    case CorrTerm::V22A:
    case CorrTerm::V22B:
    case CorrTerm::V22C:
        return coeff_C(2, N, ctx) / 3.0;
    case CorrTerm::V13A:
    case CorrTerm::V13B:
        return -coeff_C(2, N, ctx) / std::sqrt(2.0);
    default:
        return coeff_C(2, N, ctx) / std::sqrt(5.0);
    }
}

cplx R0(double W, cplx P, Sign s, const KernelContext& ctx) {
    return 0.5 * P * gating_absorption(W, ctx) * overlap_O(W, false, 0.0, 0.0, s, ctx);
}

cplx sum_R0(double W, cplx P, const KernelContext& ctx) {
    return R0(W, P, Sign::Plus, ctx) + R0(W, P, Sign::Minus, ctx);
}

cplx sum_W0(double W, double W2, const KernelContext& ctx) {
    return overlap_W(W, W2, false, 0.0, 0.0, Sign::Plus, ctx) + overlap_W(W, W2, false, 0.0, 0.0, Sign::Minus, ctx);
}

// R_1 W_1 + R_2 W_2 for G_11^(t,t)(W, W', X = W', Y = 0, tau) and G_22, without P* P' / wp.
cplx rw_same(double W, double W2, cplx P, double tau, Sign t, const KernelContext& ctx) {
    const cplx eo = overlap_O(W, true, W2, tau, t, ctx);
    const cplx ew = overlap_W(W, W2, true, 0.0, tau, t, ctx);
    const cplx pre = 0.5 * P * gating_absorption(W, ctx);
    return pre * eo.real() * ew.real() + pre * eo.imag() * ew.imag();
}

// R_1^(+)*(W', W, tau) W_1^(+)(W, W', 0, tau) + R_2^(+)* W_2^(+).
cplx rw_swapped(double W, double W2, cplx P2, double tau, const KernelContext& ctx) {
    const cplx eo = overlap_O(W2, true, W, tau, Sign::Plus, ctx);
    const cplx ew = overlap_W(W, W2, true, 0.0, tau, Sign::Plus, ctx);
    const cplx pre = std::conj(0.5 * P2 * gating_absorption(W2, ctx));
    return pre * eo.real() * ew.real() + pre * eo.imag() * ew.imag();
}

cplx main2_integrand(double W, double tau, const KernelContext& ctx) {
    const cplx R = gating_R(W, ctx);
    return std::abs(W) * index_ratio(W, ctx) * std::norm(R) * std::cos(W * tau);
}

cplx cross2_integrand(double W, double tau, const KernelContext& ctx) {
    return W * index_ratio(W, ctx) * phase_matching(W, ctx) * probe_overlap(W, Sign::Minus, ctx) *
           std::conj(gating_R(W, ctx)) * std::cos(W * tau);
}

ComplexIntegral raw_integral(CorrTerm t, double tau, const KernelContext& ctx, const quad::QuadratureConfig& cfg,
                             const PairDomain* dom, PairSeeds* seeds) {
    if (t == CorrTerm::MAIN2)
        return integrate_two_sided([&](double W) { return main2_integrand(W, tau, ctx); }, ctx, cfg);
    if (t == CorrTerm::CROSS2)
        return integrate_two_sided([&](double W) { return cross2_integrand(W, tau, ctx); }, ctx, cfg);
    auto h = [&](double a, double b) { return v_integrand(t, a, b, tau, ctx); };
    if (dom)
        return integrate_pair(h, *dom, cfg, seeds);
    const auto d = pair_domain(ctx, second_two_sided(t));
    return integrate_pair(h, d, cfg, seeds);
}

} // namespace

std::string term_name(CorrTerm t) {
    static const char* names[] = {"MAIN2", "CROSS2", "V22A", "V22B", "V22C", "V13A", "V13B", "V04A", "V04B", "V04C"};
    return names[static_cast<std::size_t>(t)];
}

int term_power(CorrTerm t) { return is_2d(t) ? 3 : 2; }

std::vector<double> default_tau_grid_fs() {
    std::vector<double> g(400);
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = 2000.0 * static_cast<double>(i) / static_cast<double>(g.size() - 1);
    return g;
}

KernelContext two_channel_context(const ParameterSet& p, bool absorption) {
    ParameterSet q = p;
    q.crystal.absorption_enabled = absorption;
    return KernelContext(q);
}

double channel_photons(double N, const TwoChannelConfig& cfg) { return cfg.half_photons_per_channel ? 0.5 * N : N; }

double correlation_norm(double N, const KernelContext& ctx) {
    const double a = eo_amplitude(ctx) * N;
    return a * a;
}

cplx v_integrand(CorrTerm t, double W, double W2, double tau, const KernelContext& ctx) {
    const cplx P = phase_matching(W, ctx);
    const cplx P2 = phase_matching(W2, ctx);
    const cplx pp = std::conj(P) * P2 / ctx.omega_p();
    const double ww = W * W2;
    const double cc = std::cos(W * tau) + std::cos(W2 * tau);
    switch (t) {
    case CorrTerm::V22A:
        return ww * std::conj(sum_R0(W2, P2, ctx)) * pp * sum_R0(W, P, ctx) *
               overlap_W(W, W2, false, 0.0, 0.0, Sign::Plus, ctx) * cc;
    case CorrTerm::V22B:
        return ww * std::conj(sum_R0(W2, P2, ctx)) * pp * rw_same(W, W2, P, tau, Sign::Plus, ctx);
    case CorrTerm::V22C:
    case CorrTerm::V04C:
        return ww * pp * sum_R0(W, P, ctx) * rw_swapped(W, W2, P2, tau, ctx);
    case CorrTerm::V13A:
        return ww * std::conj(sum_R0(W2, P2, ctx)) * pp * sum_R0(W, P, ctx) * sum_W0(W, W2, ctx) * cc *
               index_ratio(W2, ctx);
    case CorrTerm::V13B:
        // K_0 carries no delay, so R_0(W', 0, tau) = R_0(W', 0, 0).
        return ww * std::conj(sum_R0(W2, P2, ctx)) * pp *
               (rw_same(W, W2, P, tau, Sign::Plus, ctx) + rw_same(W, W2, P, tau, Sign::Minus, ctx)) *
               index_ratio(W2, ctx);
    case CorrTerm::V04A:
        return ww * std::conj(R0(W2, P2, Sign::Plus, ctx)) * pp * sum_R0(W, P, ctx) * sum_W0(W, W2, ctx) * cc;
    case CorrTerm::V04B:
        return ww * std::conj(R0(W2, P2, Sign::Plus, ctx)) * pp *
               (rw_same(W, W2, P, tau, Sign::Plus, ctx) + rw_same(W, W2, P, tau, Sign::Minus, ctx));
    default:
        throw std::invalid_argument("v_integrand needs a fourth-order term");
    }
}

TermResult corr_term(CorrTerm t, double tau_fs, double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    const double tau = tau_fs / kFsPerPs;
    return to_term(raw_integral(t, tau, ctx, cfg, nullptr, nullptr), prefactor(t, N, ctx));
}

TermResult g2_main(double tau_fs, double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    return corr_term(CorrTerm::MAIN2, tau_fs, N, ctx, cfg);
}

TermResult g2_cross_nir(double tau_fs, double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    return corr_term(CorrTerm::CROSS2, tau_fs, N, ctx, cfg);
}

namespace {

CorrTerm part_term(char part, std::initializer_list<CorrTerm> terms, const char* family) {
    const auto i = static_cast<std::size_t>(part - 'a');
    if (part < 'a' || i >= terms.size())
        throw std::invalid_argument(std::string("unknown part for ") + family);
    return *(terms.begin() + i);
}

} // namespace

TermResult v22(double tau_fs, double N, char part, const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    return corr_term(part_term(part, {CorrTerm::V22A, CorrTerm::V22B, CorrTerm::V22C}, "v22"), tau_fs, N, ctx, cfg);
}

TermResult v13(double tau_fs, double N, char part, const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    return corr_term(part_term(part, {CorrTerm::V13A, CorrTerm::V13B}, "v13"), tau_fs, N, ctx, cfg);
}

TermResult v04(double tau_fs, double N, char part, const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    return corr_term(part_term(part, {CorrTerm::V04A, CorrTerm::V04B, CorrTerm::V04C}, "v04"), tau_fs, N, ctx, cfg);
}

std::vector<double> CorrelationTrace::values(CorrTerm t) const {
    const auto& u = unit[static_cast<std::size_t>(t)];
    const double s = std::pow(photons, term_power(t));
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        out[i] = u[i] * s;
    return out;
}

namespace {

std::vector<double> sum_terms(const CorrelationTrace& tr, bool fourth) {
    std::vector<double> out(tr.tau_fs.size(), 0.0);
    for (auto t : kCorrTerms) {
        if (is_2d(t) != fourth || !tr.has(t))
            continue;
        const auto v = tr.values(t);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += v[i];
    }
    return out;
}

} // namespace

std::vector<double> CorrelationTrace::g_total_2nd() const { return sum_terms(*this, false); }
std::vector<double> CorrelationTrace::g_total_4th() const { return sum_terms(*this, true); }

std::vector<double> CorrelationTrace::G() const {
    auto g = g_total_2nd();
    const auto g4 = g_total_4th();
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = (g[i] + g4[i]) / C;
    return g;
}

bool CorrelationTrace::all_converged() const {
    for (const auto& c : converged)
        if (std::find(c.begin(), c.end(), false) != c.end())
            return false;
    return true;
}

CorrelationTrace CorrelationTrace::rescaled(double N, const KernelContext& ctx) const {
    CorrelationTrace out = *this;
    out.photons = N;
    out.C = correlation_norm(N, ctx);
    return out;
}

CorrelationTrace correlation_trace(double N, const ParameterSet& params, const TwoChannelConfig& cfg) {
    return correlation_trace(N, two_channel_context(params, cfg.absorption), cfg);
}

CorrelationTrace correlation_trace(double N, const KernelContext& ctx, const TwoChannelConfig& cfg) {
    const double Nch = channel_photons(N, cfg);
    if (!(Nch > 0.0))
        throw std::invalid_argument("photon number must be positive");
    if (cfg.tau_fs.empty())
        throw std::invalid_argument("delay grid is empty");
    CorrelationTrace tr;
    tr.tau_fs = cfg.tau_fs;
    tr.photons = Nch;
    tr.C = correlation_norm(Nch, ctx);

    // Every term is even in tau: evaluate on the sorted |tau| and map back.
    std::vector<double> abs_tau;
    for (double t : cfg.tau_fs)
        abs_tau.push_back(std::abs(t));
    std::sort(abs_tau.begin(), abs_tau.end());
    abs_tau.erase(std::unique(abs_tau.begin(), abs_tau.end()), abs_tau.end());
    std::vector<std::size_t> index(cfg.tau_fs.size());
    for (std::size_t i = 0; i < index.size(); ++i)
        index[i] = static_cast<std::size_t>(std::lower_bound(abs_tau.begin(), abs_tau.end(), std::abs(cfg.tau_fs[i])) -
                                            abs_tau.begin());

    std::vector<CorrTerm> terms = cfg.enabled;
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

    parallel_for(terms.size(), cfg.threads, [&](std::size_t k) {
        const CorrTerm t = terms[k];
        const double pre = prefactor(t, 1.0, ctx);
        std::vector<TermResult> res(abs_tau.size());
        PairSeeds seeds;
        PairDomain dom;
        if (is_2d(t))
            dom = pair_domain(ctx, second_two_sided(t));
        for (std::size_t j = 0; j < abs_tau.size(); ++j) {
            const double tau = abs_tau[j] / kFsPerPs;
            res[j] = to_term(raw_integral(t, tau, ctx, cfg.quad, is_2d(t) ? &dom : nullptr, &seeds), pre);
        }
        const auto i = static_cast<std::size_t>(t);
        for (std::size_t m = 0; m < index.size(); ++m) {
            const auto& r = res[index[m]];
            tr.unit[i].push_back(r.value);
            tr.unit_error[i].push_back(r.error);
            tr.unit_imag[i].push_back(r.imag_residue);
            tr.converged[i].push_back(r.converged);
        }
    });
    return tr;
}

} // namespace eos
