#pragma once

#include "eos/integrate.hpp"
#include "eos/kernels.hpp"
#include "eos/quad.hpp"

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace eos {

enum class CorrTerm { MAIN2, CROSS2, V22A, V22B, V22C, V13A, V13B, V04A, V04B, V04C };

inline constexpr std::array<CorrTerm, 10> kCorrTerms{CorrTerm::MAIN2, CorrTerm::CROSS2, CorrTerm::V22A, CorrTerm::V22B,
                                                     CorrTerm::V22C,  CorrTerm::V13A,   CorrTerm::V13B, CorrTerm::V04A,
                                                     CorrTerm::V04B,  CorrTerm::V04C};

std::string term_name(CorrTerm t);
int term_power(CorrTerm t);

// Lossless 50:50 splitter with T = T' = 1/sqrt2 and R = R' = i/sqrt2.
struct BeamSplitter {
    std::complex<double> T{1.0 / 1.4142135623730951, 0.0};
    std::complex<double> Tp{1.0 / 1.4142135623730951, 0.0};
    std::complex<double> R{0.0, 1.0 / 1.4142135623730951};
    std::complex<double> Rp{0.0, 1.0 / 1.4142135623730951};

    // |T|^2 + |R|^2 - 1 and |T R* + R' T'*|.
    double energy_defect() const { return std::norm(T) + std::norm(R) - 1.0; }
    double phase_defect() const { return std::abs(T * std::conj(R) + Rp * std::conj(Tp)); }
};

// 0 to 2 ps in 400 points.
std::vector<double> default_tau_grid_fs();

struct TwoChannelConfig {
    BeamSplitter splitter{};
    // Each output carries the single-channel N; set to give each channel N / 2 instead.
    bool half_photons_per_channel = false;
    bool absorption = false;
    std::vector<double> tau_fs = default_tau_grid_fs();
    std::vector<CorrTerm> enabled{kCorrTerms.begin(), kCorrTerms.end()};
    quad::QuadratureConfig quad{};
    unsigned threads = 0;
};

// Copy of `p` with absorption switched as requested, for two-channel runs.
KernelContext two_channel_context(const ParameterSet& p, bool absorption = false);

double channel_photons(double N, const TwoChannelConfig& cfg);

// Single-point evaluations at delay tau (fs) and per-channel photon number N.
TermResult corr_term(CorrTerm t, double tau_fs, double N, const KernelContext& ctx,
                     const quad::QuadratureConfig& cfg = {});
TermResult g2_main(double tau_fs, double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg = {});
TermResult g2_cross_nir(double tau_fs, double N, const KernelContext& ctx, const quad::QuadratureConfig& cfg = {});
TermResult v22(double tau_fs, double N, char part, const KernelContext& ctx, const quad::QuadratureConfig& cfg = {});
TermResult v13(double tau_fs, double N, char part, const KernelContext& ctx, const quad::QuadratureConfig& cfg = {});
TermResult v04(double tau_fs, double N, char part, const KernelContext& ctx, const quad::QuadratureConfig& cfg = {});

// Integrand of a V-term at (W, W', tau in ps) before its prefactor.
cplx v_integrand(CorrTerm t, double Omega, double Omega2, double tau_ps, const KernelContext& ctx);

// (n^3 L wp r41 N / c0)^2 in (pm/V)^2.
double correlation_norm(double N, const KernelContext& ctx);

struct CorrelationTrace {
    std::vector<double> tau_fs;
    double photons = 0.0;
    double C = 0.0;
    // Values per N^p for every enabled term, indexed like kCorrTerms; empty when disabled.
    std::array<std::vector<double>, 10> unit{};
    std::array<std::vector<double>, 10> unit_error{};
    std::array<std::vector<double>, 10> unit_imag{};
    std::array<std::vector<bool>, 10> converged{};

    bool has(CorrTerm t) const { return !unit[static_cast<std::size_t>(t)].empty(); }
    // Term values at the trace's photon number.
    std::vector<double> values(CorrTerm t) const;
    std::vector<double> g_total_2nd() const;
    std::vector<double> g_total_4th() const;
    // (g2 + g4) / C.
    std::vector<double> G() const;
    bool all_converged() const;
    CorrelationTrace rescaled(double N, const KernelContext& ctx) const;
};

CorrelationTrace correlation_trace(double N, const ParameterSet& params, const TwoChannelConfig& cfg = {});
CorrelationTrace correlation_trace(double N, const KernelContext& ctx, const TwoChannelConfig& cfg);

} // namespace eos
