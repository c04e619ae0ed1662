#pragma once

#include "eos/params.hpp"
#include "eos/quad.hpp"

#include <complex>
#include <utility>
#include <vector>

namespace eos {

using cplx = std::complex<double>;

enum class Sign { Plus, Minus };

inline constexpr Sign kSigns[2] = {Sign::Plus, Sign::Minus};

// How probe overlaps are evaluated. Auto uses closed forms for the flat spectrum and
// quadrature otherwise; Generic forces quadrature.
enum class OverlapPath { Auto, ClosedForm, Generic };

class KernelContext {
public:
    explicit KernelContext(ParameterSet params, OverlapPath path = OverlapPath::Auto);

    const ParameterSet& params() const { return params_; }
    const ProbeSpectrum& probe() const { return params_.probe; }
    const CrystalParams& crystal() const { return params_.crystal; }

    double d() const { return d_; }                                  // pm/V
    double omega_p() const { return omega_p_; }                      // rad/ps
    double mismatch_prefactor() const { return mismatch_; }          // L / (2 c0), ps
    bool closed_form() const { return closed_form_; }
    OverlapPath path() const { return path_; }

    // True when the cached d, omega_p and L/(2 c0) equal a fresh computation.
    bool cache_consistent() const;

    // Positive-side MIR integration segments in rad/ps: the crystal window intersected
    // with the support of F. `nu_max_thz` overrides the window's upper edge.
    std::vector<quad::Interval> mir_segments() const;
    std::vector<quad::Interval> mir_segments(double nu_max_thz) const;

    // Positive MIR frequencies where overlap integrands change form: 0, hi - lo, 2 lo,
    // lo + hi, 2 hi of the probe support.
    std::vector<double> overlap_kinks() const;

private:
    ParameterSet params_;
    OverlapPath path_;
    bool closed_form_;
    double d_;
    double omega_p_;
    double mismatch_;
};

// sin(x)/x with a series branch near 0.
double sinc(double x);

// Heaviside step with theta(0) = 1/2.
double heaviside(double x);

// Kernel K_i^(s)(w, X, tau): theta(+-w) times 1, cos[tau(w + X)], sin[tau(w + X)].
double kernel_K(int i, double omega, double X, double tau, Sign s);

// sinc(x) e^{ix} with x = (L W / 2 c0)(n_W - n_g).
cplx phase_matching(double Omega, const KernelContext& ctx);

// n / n_W.
double index_ratio(double Omega, const KernelContext& ctx);

// Damping applied to the gating function; 1 when absorption is disabled.
double gating_absorption(double Omega, const KernelContext& ctx);

// zeta_{w,W} = -i d (L w / 2 c0 n) P(W).
cplx zeta(double omega, double Omega, const KernelContext& ctx);

// f+(W) or f-(W) = int_0^inf dw alpha*(w) alpha(w +- W) / kappa.
cplx probe_overlap(double Omega, Sign s, const KernelContext& ctx);

// F(W) = [f+*(W) + f-(W)] / 2.
cplx overlap_F(double Omega, const KernelContext& ctx);

// R(W) = i zeta_{w,W} F(W) / (d L w / 2 c0 n), times the damping when enabled.
cplx gating_R(double Omega, const KernelContext& ctx);
cplx gating_R(double Omega, double omega, const KernelContext& ctx);

// R_i^(s)(W, X, tau) = P(W) / 2 int dw alpha*(w) alpha(w - W) K_i^(s)(w, X, tau) / kappa,
// with the same damping as R.
cplx rgate(double Omega, int i, double X, double tau, Sign s, const KernelContext& ctx);
// (R_1, R_2) from one overlap evaluation.
std::pair<cplx, cplx> rgate_trig(double Omega, double X, double tau, Sign s, const KernelContext& ctx);

// W_i^(s)(W, W', X, tau) = int dw w alpha*(w - W) K_i^(s)(w, X, tau) alpha(w - W') / kappa.
cplx wgate(double Omega, double Omega2, int i, double X, double tau, Sign s, const KernelContext& ctx);
std::pair<cplx, cplx> wgate_trig(double Omega, double Omega2, double X, double tau, Sign s,
                                 const KernelContext& ctx);

// Probe-overlap factors behind rgate and wgate, without P(W) and the damping:
// O = int dw alpha*(w) alpha(w - W) [e^{i tau (w + X)}] theta(+-w) / kappa and
// V = int dw w alpha*(w - W) [e^{i tau (w + X)}] alpha(w - W') theta(+-w) / kappa.
// With `trig`, the real and imaginary parts are the K_1 and K_2 projections.
cplx overlap_O(double Omega, bool trig, double X, double tau, Sign s, const KernelContext& ctx);
cplx overlap_W(double Omega, double Omega2, bool trig, double X, double tau, Sign s, const KernelContext& ctx);

// G_ij^(s,s') = zeta*_{wp,W} zeta_{wp,W'} R_i^(s)(W, X, tau) W_j^(s')(W, W', Y, tau)
//               / (d L wp^{3/2} / 2 c0 n)^2.
cplx ggate(double Omega, double Omega2, int i, int j, double X, double Y, double tau, Sign s, Sign s2,
           const KernelContext& ctx);

// Transverse overlap constants: j = 2, 3, 4 give 2/sqrt(3 pi^2)/w0^2, sqrt(2/pi^3)/w0^3,
// 4/(sqrt(5) pi^2 w0^2).
double overlap_A(int j, double w0);

// n^3 L wp r41 / c0 in pm/V.
double eo_amplitude(const KernelContext& ctx);
// hbar / (4 pi^2 eps0 c0 n w0^2) in SI (V^2 s^2 / m^2, numerically V^2 ps^2 / pm^2).
double field_factor(const KernelContext& ctx);

// C_jj = N^{jj+1} (n^3 L wp r41 / c0)^{2 jj} (hbar / (4 pi^2 eps0 c0 n w0^2))^jj.
double coeff_C(int jj, double N, const KernelContext& ctx);

namespace detail {

// int dw [w if weighted] alpha(w - a) alpha(w - b) over the half-line s, optionally times
// e^{i tau (w + X)}. Both paths are exposed for equivalence testing.
cplx overlap_closed(double a, double b, bool weighted, bool trig, double X, double tau, Sign s,
                    const ProbeSpectrum& p);
cplx overlap_generic(double a, double b, bool weighted, bool trig, double X, double tau, Sign s,
                     const ProbeSpectrum& p);

} // namespace detail

} // namespace eos
