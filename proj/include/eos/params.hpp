#pragma once

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace eos {

// Raised when a model is evaluated outside the range it was fitted on.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// CODATA 2018, SI units.
struct PhysicalConstants {
    const double c0 = 299792458.0;        // m/s
    const double hbar = 1.054571817e-34;  // J s
    const double eps0 = 8.8541878128e-12; // F/m
};

inline constexpr PhysicalConstants kConstants{};

// Internal units: angular frequency in rad/ps, length in um, time in ps.
namespace units {
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double c0 = 299.792458; // um/ps

constexpr double omega_from_thz(double nu) { return two_pi * nu; }
constexpr double thz_from_omega(double omega) { return omega / two_pi; }
constexpr double ps_from_fs(double t) { return 1e-3 * t; }
constexpr double fs_from_ps(double t) { return 1e3 * t; }
} // namespace units

struct DispersionModel {
    enum class Kind { Set1Lorentzian, Set2Polynomial, Tabulated };

    Kind kind = Kind::Set1Lorentzian;

    // Lorentz oscillator, frequencies in THz.
    double eps_inf = 6.7;
    double f_long = 6.2;
    double f_trans = 5.3;
    double damping = 0.09;

    // c6..c0 of the polynomial in |nu|.
    std::array<double, 7> poly{-0.0164, 0.1478, -0.5185, 0.8974, -0.7782, 0.3283, 3.0657};

    // (nu THz, n) pairs, ascending in nu, for Kind::Tabulated.
    std::vector<std::pair<double, double>> table;

    // |nu| range in THz on which the model may be evaluated.
    double valid_lo_thz = 0.0;
    double valid_hi_thz = 150.0;

    static DispersionModel set1();
    static DispersionModel set2();
    static DispersionModel tabulated(std::vector<std::pair<double, double>> nu_index);
    // Two whitespace- or comma-separated columns: nu (THz), n. '#' starts a comment.
    static DispersionModel from_file(const std::string& path);

    std::string name() const;
};

// Real index at angular frequency omega (rad/ps). Even in omega.
double refractive_index(double omega, const DispersionModel& model);

// Damping factor exp(-0.000618 nu^8 - 0.0000879 nu^6), nu in THz.
double absorption(double omega);
double absorption(double omega, bool enabled);

// Closed-form effective frequency of a flat spectrum on [wc - dw/2, wc + dw/2].
double rectangular_omega_p(double omega_c, double delta_omega);
// Center frequency for which the flat spectrum of width dw has effective frequency omega_p.
double rectangular_center_for(double omega_p, double delta_omega);

class ProbeSpectrum {
public:
    enum class Shape { Rectangular, Tabulated };

    static ProbeSpectrum rectangular(double center_thz, double bandwidth_thz, double photons);
    // Flat spectrum whose beta/kappa frequency is omega_p_thz (center solved for).
    static ProbeSpectrum rectangular_effective(double omega_p_thz, double bandwidth_thz, double photons);
    // Real non-negative amplitudes on an ascending, strictly positive frequency grid.
    // Linear interpolation inside the grid, zero outside.
    static ProbeSpectrum tabulated(std::vector<std::pair<double, double>> nu_amplitude, double photons);

    Shape shape() const { return shape_; }
    double center_thz() const { return units::thz_from_omega(0.5 * (lo_ + hi_)); }
    double bandwidth_thz() const { return units::thz_from_omega(hi_ - lo_); }
    double photons() const { return photons_; }
    ProbeSpectrum with_photons(double photons) const;

    // Support [lo, hi] on the positive axis, rad/ps.
    double support_lo() const { return lo_; }
    double support_hi() const { return hi_; }

    // Normalized amplitude; alpha(-w) = alpha(w) for the flat phase.
    double amplitude(double omega) const;
    // Breakpoints of the amplitude on the positive axis, rad/ps.
    const std::vector<double>& knots() const { return knots_; }
    // Values at the knots (tabulated); the constant level for the rectangle.
    const std::vector<double>& knot_values() const { return values_; }

    double kappa() const { return kappa_; }
    double beta() const { return beta_; }
    double omega_p() const { return kappa_ / beta_; }
    double mean_frequency() const { return mean_; }

private:
    void finish();

    Shape shape_ = Shape::Rectangular;
    double photons_ = 1.0;
    double lo_ = 0.0;
    double hi_ = 0.0;
    std::vector<double> knots_;
    std::vector<double> values_;
    double kappa_ = 1.0;
    double beta_ = 1.0;
    double mean_ = 0.0;
};

struct CrystalParams {
    double length_um = 7.0;
    double r41_pm_per_v = 3.9;
    double n = 2.76;
    double n_g = 2.9;
    double w0_um = 3.0;
    DispersionModel dispersion = DispersionModel::set1();
    bool absorption_enabled = false;
    double nu_min_thz = 18.0;
    double nu_max_thz = 150.0;

    // Effective susceptibility, pm/V.
    double d() const { return -n * n * n * n * r41_pm_per_v; }
    void validate() const;
};

struct ParameterSet {
    enum class Label { Set1, Set2, Custom };

    ProbeSpectrum probe;
    CrystalParams crystal;
    Label label = Label::Custom;

    static ParameterSet set1(double photons = 1.0);
    static ParameterSet set2(double photons = 1.0);

    void validate() const;
    std::string label_name() const;
};

// Thin-crystal condition L << n(W) W w0^2 / (2 c0) at the nonzero edges of the
// window [lo, hi] (rad/ps). Returns one message per violated edge.
std::vector<std::string> thin_crystal_warnings(const CrystalParams& crystal, double lo, double hi);

} // namespace eos
