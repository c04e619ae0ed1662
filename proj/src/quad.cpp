#include "eos/quad.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace eos::quad {

void QuadratureConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw std::invalid_argument("quadrature tolerances must be positive");
    if (max_subdivisions < 1)
        throw std::invalid_argument("max_subdivisions must be at least 1");
}

namespace {

Rule make_gk15() {
    constexpr std::array<double, 8> xgk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.0};
    constexpr std::array<double, 8> wgk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    // Gauss 7-point weights live on the odd Kronrod indices.
    constexpr std::array<double, 4> wg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
    Rule r;
    for (int k = 0; k < 7; ++k) {
        r.x.push_back(-xgk[k]);
        r.high.push_back(wgk[k]);
        r.low.push_back(k % 2 == 1 ? wg[k / 2] : 0.0);
    }
    r.x.push_back(0.0);
    r.high.push_back(wgk[7]);
    r.low.push_back(wg[3]);
    for (int k = 6; k >= 0; --k) {
        r.x.push_back(xgk[k]);
        r.high.push_back(wgk[k]);
        r.low.push_back(k % 2 == 1 ? wg[k / 2] : 0.0);
    }
    return r;
}

// Clenshaw-Curtis weights for n intervals (n + 1 points) on [-1, 1].
std::vector<double> cc_weights(int n) {
    std::vector<double> w(n + 1);
    for (int k = 0; k <= n; ++k) {
        double s = 0.0;
        for (int j = 1; j <= n / 2; ++j) {
            const double b = (2 * j == n) ? 1.0 : 2.0;
            s += b / (4.0 * j * j - 1.0) * std::cos(2.0 * j * k * std::numbers::pi / n);
        }
        const double c = (k == 0 || k == n) ? 1.0 : 2.0;
        w[k] = c / n * (1.0 - s);
    }
    return w;
}

Rule make_cc() {
    constexpr int n = 16;
    const auto hi = cc_weights(n);
    const auto lo = cc_weights(n / 2);
    Rule r;
    for (int k = 0; k <= n; ++k) {
        r.x.push_back(-std::cos(k * std::numbers::pi / n));
        r.high.push_back(hi[k]);
        r.low.push_back(k % 2 == 0 ? lo[k / 2] : 0.0);
    }
    return r;
}

struct Poly {
    std::vector<Point> v;
};

double cross(const Point& a, const Point& b, const Point& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

double area(const Poly& p) {
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < p.v.size(); ++i)
        s += cross(p.v[0], p.v[i], p.v[i + 1]);
    return 0.5 * std::abs(s);
}

// Splits a convex polygon by x - y = c into (x - y <= c, x - y >= c).
std::pair<Poly, Poly> split(const Poly& p, double c) {
    Poly below, above;
    const std::size_t n = p.v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = p.v[i];
        const Point& b = p.v[(i + 1) % n];
        const double da = a.x - a.y - c;
        const double db = b.x - b.y - c;
        if (da <= 0.0)
            below.v.push_back(a);
        if (da >= 0.0)
            above.v.push_back(a);
        if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
            // Edges are axis-aligned or parallel to the cut, so the crossing is exact.
            Point q;
            if (a.y == b.y) {
                q = {a.y + c, a.y};
            } else if (a.x == b.x) {
                q = {a.x, a.x - c};
            } else {
                const double t = da / (da - db);
                q = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
            }
            below.v.push_back(q);
            above.v.push_back(q);
        }
    }
    return {below, above};
}

} // namespace

const Rule& rule(BaseRule which) {
    static const Rule gk = make_gk15();
    static const Rule cc = make_cc();
    return which == BaseRule::GaussKronrod15 ? gk : cc;
}

std::vector<Triangle> triangulate(std::span<const Interval> xs, std::span<const Interval> ys,
                                  std::span<const double> diagonal_cuts) {
    std::vector<Triangle> out;
    for (const auto& ix : xs) {
        for (const auto& iy : ys) {
            if (!(ix.hi > ix.lo) || !(iy.hi > iy.lo))
                continue;
            const double scale = (ix.hi - ix.lo) * (iy.hi - iy.lo);
            std::vector<Poly> pieces{Poly{{{ix.lo, iy.lo}, {ix.hi, iy.lo}, {ix.hi, iy.hi}, {ix.lo, iy.hi}}}};
            for (double c : diagonal_cuts) {
                std::vector<Poly> next;
                for (const auto& p : pieces) {
                    auto [lo, hi] = split(p, c);
                    for (auto* q : {&lo, &hi})
                        if (q->v.size() >= 3 && area(*q) > 1e-12 * scale)
                            next.push_back(std::move(*q));
                }
                pieces = std::move(next);
            }
            for (const auto& p : pieces)
                for (std::size_t i = 1; i + 1 < p.v.size(); ++i) {
                    Triangle t{p.v[0], p.v[i], p.v[i + 1]};
                    if (std::abs(cross(t.a, t.b, t.c)) > 2e-12 * scale)
                        out.push_back(t);
                }
        }
    }
    return out;
}

} // namespace eos::quad
