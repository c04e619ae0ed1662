#include "eos/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace eos {

namespace {

// Axis positions where probe overlaps change form.
std::vector<double> axis_kinks(const KernelContext& ctx) {
    auto k = ctx.overlap_kinks();
    const double lo = ctx.probe().support_lo(), hi = ctx.probe().support_hi();
    k.push_back(lo);
    k.push_back(hi);
    const auto& knots = ctx.probe().knots();
    if (knots.size() > 2 && knots.size() <= 16)
        for (double a : knots)
            for (double b : knots) {
                k.push_back(std::abs(a - b));
                k.push_back(a + b);
            }
    return k;
}

std::vector<double> diagonal_cuts(const KernelContext& ctx) {
    std::vector<double> out{0.0};
    for (double k : ctx.overlap_kinks())
        if (k > 0.0) {
            out.push_back(k);
            out.push_back(-k);
        }
    return out;
}

std::vector<quad::Interval> mirrored(const std::vector<quad::Interval>& pos) {
    std::vector<quad::Interval> out;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it)
        out.push_back({-it->hi, -it->lo});
    return out;
}

quad::QuadratureConfig coarse(const quad::QuadratureConfig& cfg, std::size_t max_sub) {
    quad::QuadratureConfig c = cfg;
    c.rel_tol = 1e-3;
    c.abs_tol = 1e-300;
    c.max_subdivisions = max_sub;
    return c;
}

// One adaptive pass over the hull of `segs`, so the tolerance applies to the sum; gaps
// between segments contribute nothing.
template <class F>
ComplexIntegral sum_segments(F&& f, const std::vector<quad::Interval>& segs, const quad::QuadratureConfig& cfg) {
    ComplexIntegral out;
    if (segs.empty())
        return out;
    std::vector<double> cuts;
    for (const auto& s : segs) {
        cuts.push_back(s.lo);
        cuts.push_back(s.hi);
    }
    auto inside = [&](double w) {
        return std::any_of(segs.begin(), segs.end(), [w](const quad::Interval& s) { return w >= s.lo && w <= s.hi; });
    };
    using T = std::decay_t<decltype(f(0.0))>;
    auto g = [&](double w) -> T { return inside(w) ? f(w) : T{}; };
    auto r = quad::integrate_1d(g, segs.front().lo, segs.back().hi, cfg, cuts);
    out.value = r.value;
    out.error = r.error_estimate;
    out.evaluations = r.evaluations;
    out.converged = r.converged;
    return out;
}

} // namespace

std::vector<quad::Interval> split_segments(const KernelContext& ctx) {
    auto kinks = axis_kinks(ctx);
    std::sort(kinks.begin(), kinks.end());
    std::vector<quad::Interval> out;
    for (const auto& s : ctx.mir_segments()) {
        double a = s.lo;
        for (double k : kinks)
            if (k > a && k < s.hi) {
                out.push_back({a, k});
                a = k;
            }
        out.push_back({a, s.hi});
    }
    return out;
}

ComplexIntegral integrate_one_sided(const Integrand1d& h, const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    return sum_segments(h, split_segments(ctx), cfg);
}

ComplexIntegral integrate_two_sided(const Integrand1d& h, const KernelContext& ctx, const quad::QuadratureConfig& cfg) {
    const auto segs = split_segments(ctx);
    auto folded = [&](double w) { return h(w) + h(-w); };
    auto l1 = [&](double w) { return std::abs(h(w)) + std::abs(h(-w)); };
    const auto scale = sum_segments(l1, segs, coarse(cfg, 200));
    quad::QuadratureConfig c = cfg;
    c.abs_tol = std::max(cfg.abs_tol, cfg.rel_tol * scale.value.real());
    auto r = sum_segments(folded, segs, c);
    r.evaluations += scale.evaluations;
    return r;
}

PairDomain pair_domain(const KernelContext& ctx, bool second_two_sided) {
    const auto pos = split_segments(ctx);
    auto both = mirrored(pos);
    both.insert(both.end(), pos.begin(), pos.end());
    const auto cuts = diagonal_cuts(ctx);
    PairDomain d;
    d.folded = second_two_sided;
    if (second_two_sided)
        d.triangles = quad::triangulate(pos, both, cuts);
    else
        d.triangles = quad::triangulate(both, pos, cuts);
    return d;
}

ComplexIntegral integrate_pair(const Integrand2d& h, const PairDomain& dom, const quad::QuadratureConfig& cfg,
                               PairSeeds* seeds) {
    auto f = [&](double x, double y) -> cplx { return dom.folded ? h(x, y) + h(-x, -y) : h(x, y); };
    ComplexIntegral out;

    double floor = seeds ? seeds->abs_floor : 0.0;
    if (!(floor > 0.0)) {
        auto l1 = [&](double x, double y) -> double {
            return dom.folded ? std::abs(h(x, y)) + std::abs(h(-x, -y)) : std::abs(h(x, y));
        };
        auto scale = quad::integrate_triangles(l1, dom.triangles, coarse(cfg, 40));
        out.evaluations += scale.evaluations;
        floor = cfg.rel_tol * scale.value;
        if (seeds)
            seeds->abs_floor = floor;
    }
    quad::QuadratureConfig c = cfg;
    c.abs_tol = std::max(cfg.abs_tol, floor);

    auto r = quad::integrate_triangles(f, dom.triangles, c, seeds ? &seeds->cells : nullptr);
    if (seeds)
        seeds->cells = std::move(r.cells);
    out.value = r.value;
    out.error = r.error_estimate;
    out.evaluations += r.evaluations;
    out.converged = r.converged;
    return out;
}

TermResult to_term(const ComplexIntegral& I, double scale) {
    TermResult t;
    t.value = scale * I.value.real();
    t.imag_residue = scale * I.value.imag();
    t.error = std::abs(scale) * I.error;
    t.converged = I.converged;
    t.evaluations = I.evaluations;
    return t;
}

} // namespace eos
