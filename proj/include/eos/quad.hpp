#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace eos::quad {

enum class BaseRule { GaussKronrod15, ClenshawCurtis };

struct QuadratureConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-14;
    std::size_t max_subdivisions = 4000;
    BaseRule base_rule = BaseRule::GaussKronrod15;
    // Expected number of phase cycles across the window; seeds the initial partition.
    double oscillation_hint = 0.0;

    void validate() const;
};

// Thrown when the integrand returns NaN.
class IntegrandError : public std::runtime_error {
public:
    IntegrandError(double x, double y, const std::string& what)
        : std::runtime_error(what), x_(x), y_(y) {}
    double x() const { return x_; }
    double y() const { return y_; }

private:
    double x_;
    double y_;
};

struct Interval {
    double lo;
    double hi;
};

struct Rect {
    double x0, x1, y0, y1;
};

template <class T>
struct IntegralResult {
    T value{};
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
    std::size_t subdivisions = 0;
};

template <class T>
struct Result1d : IntegralResult<T> {
    // Final interval endpoints, usable as breakpoints of a later call.
    std::vector<double> partition;
};

template <class T>
struct Result2d : IntegralResult<T> {
    std::vector<Rect> cells;
};

// Embedded pair of rules on [-1, 1]: `high` and `low` share the node set (low is zero off
// its own nodes).
struct Rule {
    std::vector<double> x;
    std::vector<double> high;
    std::vector<double> low;
};

const Rule& rule(BaseRule which);

template <class T>
double magnitude(const T& v) {
    return std::abs(v);
}

template <class T>
bool has_nan(const T& v) {
    if constexpr (std::is_floating_point_v<T>)
        return std::isnan(v);
    else
        return std::isnan(v.real()) || std::isnan(v.imag());
}

namespace detail {

template <class T>
struct Piece {
    double a, b;
    T value;
    double err;
};

template <class T>
struct ByError {
    bool operator()(const Piece<T>& l, const Piece<T>& r) const { return l.err < r.err; }
};

template <class T, class F>
Piece<T> apply_rule(F& f, double a, double b, const Rule& r) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    T hi{};
    T lo{};
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        const double x = c + h * r.x[i];
        const T y = f(x);
        if (has_nan(y))
            throw IntegrandError(x, 0.0, "integrand returned NaN at x = " + std::to_string(x));
        hi += r.high[i] * y;
        lo += r.low[i] * y;
    }
    return {a, b, hi * h, magnitude<T>((hi - lo) * h)};
}

inline double tolerance(const QuadratureConfig& cfg, double value_magnitude) {
    return std::max(cfg.abs_tol, cfg.rel_tol * value_magnitude);
}

} // namespace detail

// Globally adaptive bisection. Breakpoints inside (a, b) seed the partition.
template <class F>
auto integrate_1d(F&& f, double a, double b, const QuadratureConfig& cfg,
                  std::span<const double> breakpoints = {})
    -> Result1d<std::decay_t<decltype(f(0.0))>> {
    using T = std::decay_t<decltype(f(0.0))>;
    cfg.validate();
    Result1d<T> out;
    if (!(b > a))
        return out;
    const Rule& r = rule(cfg.base_rule);

    std::vector<double> cuts{a};
    for (double p : breakpoints)
        if (p > a && p < b)
            cuts.push_back(p);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    if (cfg.oscillation_hint > 1.0) {
        std::vector<double> fine;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double w = cuts[k + 1] - cuts[k];
            const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(cfg.oscillation_hint * w / (b - a))));
            for (std::size_t j = 0; j < m; ++j)
                fine.push_back(cuts[k] + w * static_cast<double>(j) / static_cast<double>(m));
        }
        fine.push_back(b);
        cuts = std::move(fine);
    }

    std::priority_queue<detail::Piece<T>, std::vector<detail::Piece<T>>, detail::ByError<T>> heap;
    T total{};
    double total_err = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        auto p = detail::apply_rule<T>(f, cuts[k], cuts[k + 1], r);
        total += p.value;
        total_err += p.err;
        heap.push(p);
    }
    out.evaluations = r.x.size() * (cuts.size() - 1);

    T best = total;
    double best_err = total_err;
    const double min_width = 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
    while (total_err > detail::tolerance(cfg, magnitude<T>(total)) && out.subdivisions < cfg.max_subdivisions) {
        auto worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (worst.b - worst.a <= min_width)
            break;
        heap.pop();
        auto left = detail::apply_rule<T>(f, worst.a, mid, r);
        auto right = detail::apply_rule<T>(f, mid, worst.b, r);
        out.evaluations += 2 * r.x.size();
        ++out.subdivisions;
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        if (total_err < best_err) {
            best = total;
            best_err = total_err;
        }
    }
    // Re-sum to remove drift from the running updates.
    T resum{};
    double resum_err = 0.0;
    out.partition.reserve(heap.size() + 1);
    while (!heap.empty()) {
        const auto& p = heap.top();
        resum += p.value;
        resum_err += p.err;
        out.partition.push_back(p.a);
        out.partition.push_back(p.b);
        heap.pop();
    }
    std::sort(out.partition.begin(), out.partition.end());
    out.partition.erase(std::unique(out.partition.begin(), out.partition.end()), out.partition.end());
    if (resum_err <= best_err) {
        best = resum;
        best_err = resum_err;
    }
    out.value = best;
    out.error_estimate = best_err;
    out.converged = best_err <= detail::tolerance(cfg, magnitude<T>(best));
    return out;
}

namespace detail {

template <class T>
struct Cell {
    Rect r;
    T value;
    double err;
    double ex, ey;
};

template <class T>
struct CellByError {
    bool operator()(const Cell<T>& l, const Cell<T>& r) const { return l.err < r.err; }
};

template <class T, class F>
Cell<T> apply_tensor(F& f, const Rect& c, const Rule& r, std::vector<T>& buf) {
    const std::size_t n = r.x.size();
    const double cx = 0.5 * (c.x0 + c.x1), hx = 0.5 * (c.x1 - c.x0);
    const double cy = 0.5 * (c.y0 + c.y1), hy = 0.5 * (c.y1 - c.y0);
    buf.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = cx + hx * r.x[i];
        for (std::size_t j = 0; j < n; ++j) {
            const double y = cy + hy * r.x[j];
            const T v = f(x, y);
            if (has_nan(v))
                throw IntegrandError(x, y, "integrand returned NaN at (" + std::to_string(x) + ", " +
                                               std::to_string(y) + ")");
            buf[i * n + j] = v;
        }
    }
    T hh{}, lh{}, hl{};
    for (std::size_t i = 0; i < n; ++i) {
        T row_h{}, row_l{};
        for (std::size_t j = 0; j < n; ++j) {
            row_h += r.high[j] * buf[i * n + j];
            row_l += r.low[j] * buf[i * n + j];
        }
        hh += r.high[i] * row_h;
        lh += r.low[i] * row_h;
        hl += r.high[i] * row_l;
    }
    const double area = hx * hy;
    const double ex = magnitude<T>((hh - lh) * area);
    const double ey = magnitude<T>((hh - hl) * area);
    return {c, hh * area, ex + ey, ex, ey};
}

} // namespace detail

// Tensor-product adaptive rule. Each step bisects the worst cell along the axis whose
// embedded-rule difference is larger. `initial` seeds the partition when non-empty.
template <class F>
auto integrate_2d(F&& f, const Rect& window, const QuadratureConfig& cfg, std::span<const Rect> initial = {})
    -> Result2d<std::decay_t<decltype(f(0.0, 0.0))>> {
    using T = std::decay_t<decltype(f(0.0, 0.0))>;
    cfg.validate();
    Result2d<T> out;
    if (!(window.x1 > window.x0) || !(window.y1 > window.y0))
        return out;
    const Rule& r = rule(cfg.base_rule);
    const std::size_t per_cell = r.x.size() * r.x.size();
    std::vector<T> buf;

    std::priority_queue<detail::Cell<T>, std::vector<detail::Cell<T>>, detail::CellByError<T>> heap;
    T total{};
    double total_err = 0.0;
    auto seed = [&](const Rect& c) {
        auto cell = detail::apply_tensor<T>(f, c, r, buf);
        out.evaluations += per_cell;
        total += cell.value;
        total_err += cell.err;
        heap.push(cell);
    };
    if (initial.empty())
        seed(window);
    else
        for (const auto& c : initial)
            seed(c);

    T best = total;
    double best_err = total_err;
    while (total_err > detail::tolerance(cfg, magnitude<T>(total)) && out.subdivisions < cfg.max_subdivisions) {
        auto worst = heap.top();
        Rect a = worst.r, b = worst.r;
        if (worst.ex >= worst.ey) {
            const double m = 0.5 * (worst.r.x0 + worst.r.x1);
            if (m <= worst.r.x0 || m >= worst.r.x1)
                break;
            a.x1 = m;
            b.x0 = m;
        } else {
            const double m = 0.5 * (worst.r.y0 + worst.r.y1);
            if (m <= worst.r.y0 || m >= worst.r.y1)
                break;
            a.y1 = m;
            b.y0 = m;
        }
        heap.pop();
        auto ca = detail::apply_tensor<T>(f, a, r, buf);
        auto cb = detail::apply_tensor<T>(f, b, r, buf);
        out.evaluations += 2 * per_cell;
        ++out.subdivisions;
        total += ca.value + cb.value - worst.value;
        total_err += ca.err + cb.err - worst.err;
        heap.push(ca);
        heap.push(cb);
        if (total_err < best_err) {
            best = total;
            best_err = total_err;
        }
    }
    T resum{};
    double resum_err = 0.0;
    out.cells.reserve(heap.size());
    while (!heap.empty()) {
        resum += heap.top().value;
        resum_err += heap.top().err;
        out.cells.push_back(heap.top().r);
        heap.pop();
    }
    if (resum_err <= best_err) {
        best = resum;
        best_err = resum_err;
    }
    out.value = best;
    out.error_estimate = best_err;
    out.converged = best_err <= detail::tolerance(cfg, magnitude<T>(best));
    return out;
}

struct Point {
    double x, y;
};

struct Triangle {
    Point a, b, c;
};

// Integral over a triangle via the collapsed map
// p(s, t) = a + s (b - a) + s t (c - b), |J| = s |det(b - a, c - b)|, on the unit square.
template <class F>
auto integrate_triangle(F&& f, const Triangle& tri, const QuadratureConfig& cfg, std::span<const Rect> initial = {})
    -> Result2d<std::decay_t<decltype(f(0.0, 0.0))>> {
    const double ux = tri.b.x - tri.a.x, uy = tri.b.y - tri.a.y;
    const double vx = tri.c.x - tri.b.x, vy = tri.c.y - tri.b.y;
    const double det = std::abs(ux * vy - uy * vx);
    auto mapped = [&](double s, double t) {
        const double x = tri.a.x + s * ux + s * t * vx;
        const double y = tri.a.y + s * uy + s * t * vy;
        return f(x, y) * (s * det);
    };
    return integrate_2d(mapped, Rect{0.0, 1.0, 0.0, 1.0}, cfg, initial);
}

// Product of x- and y-segments cut along the lines x - y = c for every c in `diagonal_cuts`,
// split into triangles. Degenerate pieces are dropped.
std::vector<Triangle> triangulate(std::span<const Interval> xs, std::span<const Interval> ys,
                                  std::span<const double> diagonal_cuts);

// Integral over a triangle list with one global error heap, so the tolerance applies to
// the sum. Optional per-triangle seed partitions (cells on the unit square of each map).
template <class T>
struct PiecewiseResult : IntegralResult<T> {
    std::vector<std::vector<Rect>> cells;
};

template <class F>
auto integrate_triangles(F&& f, std::span<const Triangle> tris, const QuadratureConfig& cfg,
                         const std::vector<std::vector<Rect>>* seeds = nullptr)
    -> PiecewiseResult<std::decay_t<decltype(f(0.0, 0.0))>> {
    using T = std::decay_t<decltype(f(0.0, 0.0))>;
    cfg.validate();
    PiecewiseResult<T> out;
    out.cells.resize(tris.size());
    if (tris.empty())
        return out;
    const Rule& r = rule(cfg.base_rule);
    const std::size_t per_cell = r.x.size() * r.x.size();
    std::vector<T> buf;

    struct Tagged {
        detail::Cell<T> c;
        std::size_t k;
    };
    auto by_err = [](const Tagged& a, const Tagged& b) { return a.c.err < b.c.err; };
    std::priority_queue<Tagged, std::vector<Tagged>, decltype(by_err)> heap(by_err);

    auto eval = [&](std::size_t k, const Rect& c) {
        const Triangle& tri = tris[k];
        const double ux = tri.b.x - tri.a.x, uy = tri.b.y - tri.a.y;
        const double vx = tri.c.x - tri.b.x, vy = tri.c.y - tri.b.y;
        const double det = std::abs(ux * vy - uy * vx);
        auto mapped = [&](double s, double t) {
            return f(tri.a.x + s * ux + s * t * vx, tri.a.y + s * uy + s * t * vy) * (s * det);
        };
        out.evaluations += per_cell;
        return Tagged{detail::apply_tensor<T>(mapped, c, r, buf), k};
    };

    T total{};
    double total_err = 0.0;
    for (std::size_t k = 0; k < tris.size(); ++k) {
        std::vector<Rect> init{Rect{0.0, 1.0, 0.0, 1.0}};
        if (seeds && k < seeds->size() && !(*seeds)[k].empty())
            init = (*seeds)[k];
        for (const auto& c : init) {
            auto t = eval(k, c);
            total += t.c.value;
            total_err += t.c.err;
            heap.push(t);
        }
    }
    T best = total;
    double best_err = total_err;
    const std::size_t budget = cfg.max_subdivisions * tris.size();
    while (total_err > detail::tolerance(cfg, magnitude<T>(total)) && out.subdivisions < budget) {
        const Tagged worst = heap.top();
        Rect a = worst.c.r, b = worst.c.r;
        if (worst.c.ex >= worst.c.ey) {
            const double m = 0.5 * (a.x0 + a.x1);
            if (m <= a.x0 || m >= a.x1)
                break;
            a.x1 = m;
            b.x0 = m;
        } else {
            const double m = 0.5 * (a.y0 + a.y1);
            if (m <= a.y0 || m >= a.y1)
                break;
            a.y1 = m;
            b.y0 = m;
        }
        heap.pop();
        auto ta = eval(worst.k, a);
        auto tb = eval(worst.k, b);
        ++out.subdivisions;
        total += ta.c.value + tb.c.value - worst.c.value;
        total_err += ta.c.err + tb.c.err - worst.c.err;
        heap.push(ta);
        heap.push(tb);
        if (total_err < best_err) {
            best = total;
            best_err = total_err;
        }
    }
    T resum{};
    double resum_err = 0.0;
    while (!heap.empty()) {
        const auto& t = heap.top();
        resum += t.c.value;
        resum_err += t.c.err;
        out.cells[t.k].push_back(t.c.r);
        heap.pop();
    }
    if (resum_err <= best_err) {
        best = resum;
        best_err = resum_err;
    }
    out.value = best;
    out.error_estimate = best_err;
    out.converged = best_err <= detail::tolerance(cfg, magnitude<T>(best));
    return out;
}

} // namespace eos::quad
