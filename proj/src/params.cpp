#include "eos/params.hpp"

#include "eos/quad.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

namespace eos {

namespace {

std::string window_text(double lo, double hi) {
    std::ostringstream s;
    s << "[" << lo << ", " << hi << "] THz";
    return s.str();
}

double lorentzian_index(double nu, const DispersionModel& m) {
    const double num = m.f_long * m.f_long - m.f_trans * m.f_trans;
    const std::complex<double> den(m.f_trans * m.f_trans - nu * nu, -m.damping * std::abs(nu));
    return std::sqrt(m.eps_inf * (1.0 + num / den)).real();
}

double polynomial_index(double nu, const DispersionModel& m) {
    const double a = std::abs(nu);
    double s = 0.0;
    for (double c : m.poly)
        s = s * a + c;
    return s;
}

double tabulated_index(double nu, const DispersionModel& m) {
    const double a = std::abs(nu);
    const auto& t = m.table;
    auto it = std::lower_bound(t.begin(), t.end(), a, [](const auto& p, double v) { return p.first < v; });
    if (it == t.begin())
        return it->second;
    if (it == t.end())
        return t.back().second;
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    return y0 + (y1 - y0) * (a - x0) / (x1 - x0);
}

quad::QuadratureConfig fine_cfg() {
    quad::QuadratureConfig c;
    c.rel_tol = 1e-14;
    c.abs_tol = 1e-300;
    c.max_subdivisions = 2000;
    return c;
}

} // namespace

DispersionModel DispersionModel::set1() {
    DispersionModel m;
    m.kind = Kind::Set1Lorentzian;
    m.valid_lo_thz = 0.0;
    m.valid_hi_thz = 150.0;
    return m;
}

DispersionModel DispersionModel::set2() {
    DispersionModel m;
    m.kind = Kind::Set2Polynomial;
    // The fit turns over above a few THz (n < 1 beyond ~3.9 THz).
    m.valid_lo_thz = 0.0;
    m.valid_hi_thz = 3.5;
    return m;
}

DispersionModel DispersionModel::tabulated(std::vector<std::pair<double, double>> nu_index) {
    if (nu_index.size() < 2)
        throw std::invalid_argument("tabulated dispersion needs at least two rows");
    std::sort(nu_index.begin(), nu_index.end());
    for (std::size_t i = 0; i < nu_index.size(); ++i) {
        if (nu_index[i].first < 0.0 || !(nu_index[i].second > 0.0))
            throw std::invalid_argument("tabulated dispersion needs nu >= 0 and n > 0");
        if (i > 0 && nu_index[i].first == nu_index[i - 1].first)
            throw std::invalid_argument("tabulated dispersion has duplicate frequencies");
    }
    DispersionModel m;
    m.kind = Kind::Tabulated;
    m.table = std::move(nu_index);
    m.valid_lo_thz = m.table.front().first;
    m.valid_hi_thz = m.table.back().first;
    return m;
}

DispersionModel DispersionModel::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open dispersion table " + path);
    std::vector<std::pair<double, double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double nu, n;
        if (ls >> nu >> n)
            rows.emplace_back(nu, n);
    }
    return tabulated(std::move(rows));
}

std::string DispersionModel::name() const {
    switch (kind) {
    case Kind::Set1Lorentzian:
        return "set1";
    case Kind::Set2Polynomial:
        return "set2";
    case Kind::Tabulated:
        return "tabulated";
    }
    return "unknown";
}

double refractive_index(double omega, const DispersionModel& model) {
    const double nu = std::abs(units::thz_from_omega(omega));
    if (nu < model.valid_lo_thz || nu > model.valid_hi_thz)
        throw DomainError("refractive index requested at " + std::to_string(nu) + " THz, outside the " +
                          model.name() + " validity window " + window_text(model.valid_lo_thz, model.valid_hi_thz));
    switch (model.kind) {
    case DispersionModel::Kind::Set1Lorentzian:
        return lorentzian_index(nu, model);
    case DispersionModel::Kind::Set2Polynomial:
        return polynomial_index(nu, model);
    case DispersionModel::Kind::Tabulated:
        return tabulated_index(nu, model);
    }
    return 0.0;
}

double absorption(double omega) {
    const double nu = units::thz_from_omega(omega);
    const double n2 = nu * nu;
    const double n6 = n2 * n2 * n2;
    return std::exp(-0.000618 * n6 * n2 - 0.0000879 * n6);
}

double absorption(double omega, bool enabled) { return enabled ? absorption(omega) : 1.0; }

double rectangular_omega_p(double omega_c, double delta_omega) {
    return delta_omega / std::log((omega_c + 0.5 * delta_omega) / (omega_c - 0.5 * delta_omega));
}

double rectangular_center_for(double omega_p, double delta_omega) {
    const double x = delta_omega / (2.0 * omega_p);
    return 0.5 * delta_omega / std::tanh(x);
}

ProbeSpectrum ProbeSpectrum::rectangular(double center_thz, double bandwidth_thz, double photons) {
    if (!(bandwidth_thz > 0.0))
        throw std::invalid_argument("probe bandwidth must be positive");
    if (!(center_thz - 0.5 * bandwidth_thz > 0.0))
        throw std::invalid_argument("probe support must lie at positive frequencies");
    ProbeSpectrum s;
    s.shape_ = Shape::Rectangular;
    s.photons_ = photons;
    s.lo_ = units::omega_from_thz(center_thz - 0.5 * bandwidth_thz);
    s.hi_ = units::omega_from_thz(center_thz + 0.5 * bandwidth_thz);
    s.knots_ = {s.lo_, s.hi_};
    s.values_ = {1.0, 1.0};
    s.finish();
    return s;
}

ProbeSpectrum ProbeSpectrum::rectangular_effective(double omega_p_thz, double bandwidth_thz, double photons) {
    const double center = rectangular_center_for(omega_p_thz, bandwidth_thz);
    return rectangular(center, bandwidth_thz, photons);
}

ProbeSpectrum ProbeSpectrum::tabulated(std::vector<std::pair<double, double>> nu_amplitude, double photons) {
    if (nu_amplitude.size() < 2)
        throw std::invalid_argument("tabulated probe needs at least two rows");
    std::sort(nu_amplitude.begin(), nu_amplitude.end());
    ProbeSpectrum s;
    s.shape_ = Shape::Tabulated;
    s.photons_ = photons;
    for (std::size_t i = 0; i < nu_amplitude.size(); ++i) {
        const auto [nu, a] = nu_amplitude[i];
        if (!(nu > 0.0))
            throw std::invalid_argument("tabulated probe frequencies must be positive");
        if (a < 0.0)
            throw std::invalid_argument("flat-phase amplitudes must be non-negative");
        if (i > 0 && nu == nu_amplitude[i - 1].first)
            throw std::invalid_argument("tabulated probe has duplicate frequencies");
        s.knots_.push_back(units::omega_from_thz(nu));
        s.values_.push_back(a);
    }
    s.lo_ = s.knots_.front();
    s.hi_ = s.knots_.back();
    s.finish();
    return s;
}

void ProbeSpectrum::finish() {
    const auto cfg = fine_cfg();
    auto sq = [this](double w) {
        const double a = amplitude(w);
        return a * a;
    };
    const double raw = quad::integrate_1d(sq, lo_, hi_, cfg, knots_).value;
    if (!(raw > 0.0))
        throw std::invalid_argument("probe spectrum has zero norm");
    const double scale = 1.0 / std::sqrt(raw);
    for (double& v : values_)
        v *= scale;
    kappa_ = quad::integrate_1d(sq, lo_, hi_, cfg, knots_).value;
    beta_ = quad::integrate_1d([&](double w) { return sq(w) / w; }, lo_, hi_, cfg, knots_).value;
    mean_ = quad::integrate_1d([&](double w) { return sq(w) * w; }, lo_, hi_, cfg, knots_).value / kappa_;
}

ProbeSpectrum ProbeSpectrum::with_photons(double photons) const {
    ProbeSpectrum s = *this;
    s.photons_ = photons;
    return s;
}

double ProbeSpectrum::amplitude(double omega) const {
    const double w = std::abs(omega);
    if (w < lo_ || w > hi_)
        return 0.0;
    if (shape_ == Shape::Rectangular)
        return values_.front();
    auto it = std::upper_bound(knots_.begin(), knots_.end(), w);
    if (it == knots_.end())
        return values_.back();
    const auto i = static_cast<std::size_t>(it - knots_.begin());
    const double t = (w - knots_[i - 1]) / (knots_[i] - knots_[i - 1]);
    return values_[i - 1] + t * (values_[i] - values_[i - 1]);
}

void CrystalParams::validate() const {
    if (!(length_um > 0.0) || !(w0_um > 0.0) || !(n > 0.0) || !(n_g > 0.0))
        throw std::invalid_argument("crystal length, waist and indices must be positive");
    if (nu_min_thz < 0.0 || !(nu_max_thz > nu_min_thz))
        throw std::invalid_argument("MIR window needs 0 <= nu_min < nu_max, got " + window_text(nu_min_thz, nu_max_thz));
}

void ParameterSet::validate() const {
    crystal.validate();
    if (!(probe.support_lo() > 0.0))
        throw std::invalid_argument("probe support must be strictly positive");
    if (!(probe.photons() > 0.0))
        throw std::invalid_argument("photon number must be positive");
}

std::string ParameterSet::label_name() const {
    switch (label) {
    case Label::Set1:
        return "set1";
    case Label::Set2:
        return "set2";
    case Label::Custom:
        return "custom";
    }
    return "custom";
}

ParameterSet ParameterSet::set1(double photons) {
    ParameterSet p;
    p.label = Label::Set1;
    p.probe = ProbeSpectrum::rectangular_effective(247.0, 150.0, photons);
    p.crystal = CrystalParams{};
    p.crystal.length_um = 7.0;
    p.crystal.r41_pm_per_v = 3.9;
    p.crystal.n = 2.76;
    p.crystal.n_g = 2.9;
    p.crystal.w0_um = 3.0;
    p.crystal.dispersion = DispersionModel::set1();
    p.crystal.absorption_enabled = false;
    p.crystal.nu_min_thz = 18.0;
    p.crystal.nu_max_thz = 150.0;
    return p;
}

ParameterSet ParameterSet::set2(double photons) {
    ParameterSet p;
    p.label = Label::Set2;
    p.probe = ProbeSpectrum::rectangular_effective(375.0, 2.77, photons);
    p.crystal.length_um = 3000.0;
    p.crystal.r41_pm_per_v = 3.9;
    p.crystal.n = 2.85;
    p.crystal.n_g = 3.18;
    p.crystal.w0_um = 125.0;
    p.crystal.dispersion = DispersionModel::set2();
    p.crystal.absorption_enabled = true;
    p.crystal.nu_min_thz = 0.0;
    p.crystal.nu_max_thz = 10.0;
    return p;
}

std::vector<std::string> thin_crystal_warnings(const CrystalParams& crystal, double lo, double hi) {
    std::vector<std::string> out;
    for (double w : {lo, hi}) {
        if (!(w > 0.0))
            continue;
        const double n = refractive_index(w, crystal.dispersion);
        const double z = n * w * crystal.w0_um * crystal.w0_um / (2.0 * units::c0);
        if (crystal.length_um >= z) {
            std::ostringstream s;
            s << "thin-crystal condition violated at " << units::thz_from_omega(w) << " THz: L = " << crystal.length_um
              << " um, n W w0^2 / (2 c0) = " << z << " um";
            out.push_back(s.str());
        }
    }
    return out;
}

} // namespace eos
