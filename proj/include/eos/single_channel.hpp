#pragma once

#include "eos/integrate.hpp"
#include "eos/kernels.hpp"
#include "eos/quad.hpp"

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eos {

enum class VarTerm { S0S0, S1S1, S2S0, S2SQ, S3S1, S4S0, CHI3 };

inline constexpr std::array<VarTerm, 7> kVarTerms{VarTerm::S0S0, VarTerm::S1S1, VarTerm::S2S0, VarTerm::S2SQ,
                                                  VarTerm::S3S1, VarTerm::S4S0, VarTerm::CHI3};

std::string term_name(VarTerm t);

// Photon-number exponent p of a term scaling as N^p.
int term_power(VarTerm t);

// Third-order susceptibility of the probe itself.
struct Chi3Params {
    // Effective susceptibility in m^2/V^2, summed over the contributing tensor components.
    double chi3_m2_per_v2 = 4.5e-20;
    bool enabled = true;
};

// Individual variance terms at photon number N (in units of photons^2 on the detector).
TermResult var_base_shot(double N);
TermResult var_S1(double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg = {});
TermResult var_S2_S0(double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg = {});
TermResult var_S2_sq(double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg = {});
TermResult var_S3_S1(double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg = {});
TermResult var_S4_S0(double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg = {});
TermResult var_chi3(double N, const KernelContext& ctx, const Chi3Params& chi3 = {},
                    const quad::QuadratureConfig& cfg = {});

// Integrands of the double-integral terms before prefactors, exposed for pointwise checks.
namespace integrand {
cplx s2sq(double Omega, double Omega2, const KernelContext& ctx);
cplx s3s1(double Omega, double Omega2, const KernelContext& ctx);
cplx s4s0(double Omega, double Omega2, const KernelContext& ctx);
} // namespace integrand

// The photon-number-independent triple integral int dw' rho w' |int dw F(w' - w) alpha(w)|^2 / beta,
// in ps^-4.
TermResult chi3_integral(const KernelContext& ctx, const quad::QuadratureConfig& cfg = {});

struct BreakdownOptions {
    quad::QuadratureConfig quad{};
    Chi3Params chi3{};
    bool include_chi3_in_total = false;
    unsigned threads = 0; // 0: hardware concurrency
};

// Term values per unit N^p: var_t(N) = coefficient_t N^{p_t}.
struct VarianceCoefficients {
    std::array<TermResult, 7> unit{};
    bool include_chi3_in_total = false;

    const TermResult& operator[](VarTerm t) const { return unit[static_cast<std::size_t>(t)]; }
    double value(VarTerm t, double N) const;
    double error(VarTerm t, double N) const;
    double total(double N) const;
    // sqrt(total) / N.
    double rms(double N) const;
    bool converged() const;
};

VarianceCoefficients variance_coefficients(const KernelContext& ctx, const BreakdownOptions& opt = {});

struct VarianceBreakdown {
    double N = 0.0;
    std::array<TermResult, 7> terms{};
    double total = 0.0;
    double rms = 0.0;
    bool include_chi3_in_total = false;

    const TermResult& operator[](VarTerm t) const { return terms[static_cast<std::size_t>(t)]; }
};

VarianceBreakdown breakdown(double N, const KernelContext& ctx, const BreakdownOptions& opt = {});
VarianceBreakdown breakdown(double N, const VarianceCoefficients& c);

// Thrown when the sampled rms curve is not unimodal on the bracket or its minimum sits at an edge.
class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NminResult {
    double N_min = 0.0;
    double rms_min = 0.0;
    // Combined estimate from coefficient errors and the search tolerance.
    double N_error = 0.0;
    std::size_t evaluations = 0;
};

struct NminOptions {
    double N_lo = 1e6;
    double N_hi = 1e16;
    double rel_tol = 1e-3;
    std::size_t samples = 61;
};

// Golden-section search over log N on a user-supplied rms curve.
NminResult find_Nmin(const std::function<double(double)>& rms, const NminOptions& opt = {});
NminResult find_Nmin(const VarianceCoefficients& c, const NminOptions& opt = {});
NminResult find_Nmin(const KernelContext& ctx, const BreakdownOptions& bopt = {}, const NminOptions& opt = {});

struct WaistPoint {
    double w0_um = 0.0;
    double L_over_w0 = 0.0;
    NminResult nmin{};
    double rms_total = 0.0;
    double rms_shot = 0.0;  // 1 / sqrt(N)
    double rms_s1 = 0.0;    // sqrt(var_S1) / N
};

std::vector<WaistPoint> waist_sweep(const ParameterSet& base, const std::vector<double>& w0_um,
                                    const BreakdownOptions& bopt = {}, const NminOptions& nopt = {});

// Relative change of every MIR term when the window's upper edge is doubled (clipped to the
// dispersion model's validity). Returns max |v(2 nu_max) - v(nu_max)| / |v(nu_max)| over the
// non-vanishing terms.
double window_doubling_change(const KernelContext& ctx, const BreakdownOptions& opt = {});

} // namespace eos
