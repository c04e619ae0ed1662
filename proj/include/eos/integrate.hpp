#pragma once

#include "eos/kernels.hpp"
#include "eos/quad.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace eos {

// One variance or correlation contribution with its quadrature bookkeeping.
struct TermResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
    std::size_t evaluations = 0;
    // Imaginary part of the complex integral, scaled like `value`.
    double imag_residue = 0.0;
};

using Integrand1d = std::function<cplx(double)>;
using Integrand2d = std::function<cplx(double, double)>;

struct ComplexIntegral {
    cplx value{};
    double error = 0.0;
    bool converged = true;
    std::size_t evaluations = 0;
};

// Positive MIR segments split at the overlap kinks.
std::vector<quad::Interval> split_segments(const KernelContext& ctx);

// int_{W in window} h, W >= 0.
ComplexIntegral integrate_one_sided(const Integrand1d& h, const KernelContext& ctx, const quad::QuadratureConfig& cfg);

// int over the mirrored window, evaluated as int_{W >= 0} [h(W) + h(-W)].
// The absolute tolerance is floored at rel_tol times a coarse estimate of int |h|.
ComplexIntegral integrate_two_sided(const Integrand1d& h, const KernelContext& ctx, const quad::QuadratureConfig& cfg);

// Domain of a double MIR integral: W always two-sided; W' two-sided or restricted to W' >= 0.
// For the fully two-sided case the pieces cover W >= 0 only and integrands are folded
// as h(W, W') + h(-W, -W').
struct PairDomain {
    std::vector<quad::Triangle> triangles;
    bool folded = false;
};

PairDomain pair_domain(const KernelContext& ctx, bool second_two_sided);

// Reusable per-triangle partitions for sequences of related integrals.
struct PairSeeds {
    std::vector<std::vector<quad::Rect>> cells;
    double abs_floor = 0.0;
};

// Double integral over `dom`. When `seeds` is given its partitions seed the adaptive rule
// and are replaced by the final ones; its abs_floor is computed on first use.
ComplexIntegral integrate_pair(const Integrand2d& h, const PairDomain& dom, const quad::QuadratureConfig& cfg,
                               PairSeeds* seeds = nullptr);

TermResult to_term(const ComplexIntegral& I, double scale);

} // namespace eos
