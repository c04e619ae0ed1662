#include "eos/config.hpp"
#include "eos/params.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace eos;
using Catch::Matchers::WithinRel;

namespace {

// Simpson's rule on a fine grid, independent of the library quadrature.
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

} // namespace

TEST_CASE("physical constants are CODATA and positive") {
    CHECK(kConstants.c0 == 299792458.0);
    CHECK(kConstants.hbar > 0.0);
    CHECK(kConstants.eps0 > 0.0);
    CHECK_THAT(units::c0 * 1e6, WithinRel(kConstants.c0, 1e-15)); // um/ps to m/s
}

TEST_CASE("rectangular effective frequency matches the log formula") {
    for (auto [c, b] : {std::pair{247.0, 150.0}, {375.0, 2.77}, {100.0, 199.0}}) {
        const auto p = ProbeSpectrum::rectangular(c, b, 1.0);
        const double wc = units::omega_from_thz(c), dw = units::omega_from_thz(b);
        const double want = dw / std::log((wc + dw / 2) / (wc - dw / 2));
        CHECK_THAT(p.omega_p(), WithinRel(want, 1e-12));
        CHECK_THAT(p.kappa(), WithinRel(1.0, 1e-12));
    }
}

TEST_CASE("presets carry the quoted effective frequency and crystal values") {
    const auto s1 = ParameterSet::set1();
    CHECK_THAT(units::thz_from_omega(s1.probe.omega_p()), WithinRel(247.0, 1e-12));
    CHECK_THAT(s1.probe.bandwidth_thz(), WithinRel(150.0, 1e-12));
    CHECK(s1.crystal.length_um == 7.0);
    CHECK(s1.crystal.w0_um == 3.0);
    CHECK(s1.crystal.n == 2.76);
    CHECK(s1.crystal.n_g == 2.9);
    CHECK(s1.crystal.nu_min_thz == 18.0);
    CHECK(s1.crystal.nu_max_thz == 150.0);
    CHECK_FALSE(s1.crystal.absorption_enabled);

    const auto s2 = ParameterSet::set2();
    CHECK_THAT(units::thz_from_omega(s2.probe.omega_p()), WithinRel(375.0, 1e-12));
    CHECK(s2.crystal.length_um == 3000.0);
    CHECK(s2.crystal.w0_um == 125.0);
    CHECK(s2.crystal.n == 2.85);
    CHECK(s2.crystal.n_g == 3.18);
    CHECK(s2.crystal.absorption_enabled);
    CHECK(s2.probe.support_lo() > 0.0);
}

TEST_CASE("effective susceptibility is recomputed from r41") {
    CrystalParams c;
    c.r41_pm_per_v = 4.0;
    c.n = 2.0;
    CHECK(c.d() == -64.0);
}

TEST_CASE("tabulated probe is normalized and its moments agree with direct integration") {
    const auto p = ProbeSpectrum::tabulated({{10.0, 0.0}, {160.0, 1.0}}, 1.0);
    const double lo = p.support_lo(), hi = p.support_hi();
    CHECK_THAT(simpson([&](double w) { return p.amplitude(w) * p.amplitude(w); }, lo, hi), WithinRel(1.0, 1e-9));
    const double beta = simpson([&](double w) { return p.amplitude(w) * p.amplitude(w) / w; }, lo, hi);
    CHECK_THAT(p.omega_p(), WithinRel(1.0 / beta, 1e-8));
    CHECK(p.amplitude(-0.5 * (lo + hi)) == p.amplitude(0.5 * (lo + hi)));
    CHECK(p.amplitude(hi * 1.01) == 0.0);
}

TEST_CASE("probe validation") {
    CHECK_THROWS_AS(ProbeSpectrum::rectangular(50.0, 120.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ProbeSpectrum::rectangular(50.0, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ProbeSpectrum::tabulated({{10.0, 1.0}}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ProbeSpectrum::tabulated({{10.0, -1.0}, {20.0, 1.0}}, 1.0), std::invalid_argument);
}

TEST_CASE("dispersion models") {
    const auto m1 = DispersionModel::set1();
    CHECK_THAT(refractive_index(0.0, m1), WithinRel(std::sqrt(6.7) * 6.2 / 5.3, 1e-12));
    for (double nu : {18.0, 40.0, 100.0, 150.0}) {
        const double w = units::omega_from_thz(nu);
        CHECK(refractive_index(w, m1) > 0.0);
        CHECK(refractive_index(w, m1) == refractive_index(-w, m1));
    }
    const auto m2 = DispersionModel::set2();
    CHECK_THAT(refractive_index(0.0, m2), WithinRel(3.0657, 1e-14));
    // Horner evaluation of the printed polynomial at 1 THz.
    const double at1 = -0.0164 + 0.1478 - 0.5185 + 0.8974 - 0.7782 + 0.3283 + 3.0657;
    CHECK_THAT(refractive_index(units::omega_from_thz(1.0), m2), WithinRel(at1, 1e-13));
    CHECK_THROWS_AS(refractive_index(units::omega_from_thz(5.0), m2), DomainError);
    CHECK_THROWS_AS(refractive_index(units::omega_from_thz(200.0), m1), DomainError);

    const auto t = DispersionModel::tabulated({{0.0, 3.0}, {2.0, 3.4}});
    CHECK_THAT(refractive_index(units::omega_from_thz(1.0), t), WithinRel(3.2, 1e-14));
}

TEST_CASE("absorption damping") {
    CHECK(absorption(0.0) == 1.0);
    CHECK(absorption(123.0, false) == 1.0);
    const double nu = 2.0;
    const double want = std::exp(-0.000618 * std::pow(nu, 8) - 0.0000879 * std::pow(nu, 6));
    CHECK_THAT(absorption(units::omega_from_thz(nu)), WithinRel(want, 1e-13));
    double prev = 1.0;
    for (double v = 0.1; v < 4.0; v += 0.1) {
        const double a = absorption(units::omega_from_thz(v));
        CHECK(a <= prev);
        prev = a;
    }
}

TEST_CASE("thin-crystal check warns only when violated") {
    CrystalParams thin = ParameterSet::set1().crystal;
    thin.length_um = 1.0;
    thin.w0_um = 100.0;
    CHECK(thin_crystal_warnings(thin, units::omega_from_thz(18.0), units::omega_from_thz(150.0)).empty());
    // A zero edge carries no condition.
    CHECK(thin_crystal_warnings(thin, 0.0, units::omega_from_thz(150.0)).empty());
    CrystalParams thick = thin;
    thick.length_um = 5000.0;
    thick.w0_um = 1.0;
    CHECK_FALSE(thin_crystal_warnings(thick, units::omega_from_thz(18.0), units::omega_from_thz(150.0)).empty());
}

TEST_CASE("crystal validation rejects bad windows") {
    CrystalParams c;
    c.nu_min_thz = 20.0;
    c.nu_max_thz = 10.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.nu_min_thz = -1.0;
    c.nu_max_thz = 10.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("config files override preset values") {
    const auto base = ParameterSet::set1();
    const auto p = parse_config(R"(
[probe]
center_thz = 300.0
bandwidth_thz = 100.0
photons = 2e9
[crystal]
length_um = 10.0
w0_um = 4.0
absorption = true
mir_window_thz = [20.0, 120.0]
)",
                                base);
    CHECK(p.label == ParameterSet::Label::Custom);
    CHECK_THAT(p.probe.center_thz(), WithinRel(300.0, 1e-12));
    CHECK_THAT(p.probe.bandwidth_thz(), WithinRel(100.0, 1e-12));
    CHECK(p.probe.photons() == 2e9);
    CHECK(p.crystal.length_um == 10.0);
    CHECK(p.crystal.w0_um == 4.0);
    CHECK(p.crystal.absorption_enabled);
    CHECK(p.crystal.nu_min_thz == 20.0);
    CHECK(p.crystal.nu_max_thz == 120.0);
    CHECK(p.crystal.n == base.crystal.n);

    CHECK_THROWS_AS(parse_config("[probe]\ncolour = 1\n", base), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("crystal.n = \"x\"\n", base), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("[crystal\n", base), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("[crystal]\nmir_window_thz = [5.0]\n", base), std::invalid_argument);
}

TEST_CASE("config can load a tabulated dispersion relative to the file") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "eos_config_test";
    fs::create_directories(dir);
    {
        std::ofstream t(dir / "index.txt");
        t << "# nu n\n0 3.0\n100, 3.2\n200 3.4\n";
        std::ofstream c(dir / "run.toml");
        c << "[crystal]\ndispersion = \"index.txt\"\n";
    }
    const auto p = load_config((dir / "run.toml").string(), ParameterSet::set1());
    CHECK(p.crystal.dispersion.kind == DispersionModel::Kind::Tabulated);
    CHECK_THAT(refractive_index(units::omega_from_thz(150.0), p.crystal.dispersion), WithinRel(3.3, 1e-12));
    CHECK_THROWS_AS(load_config((dir / "missing.toml").string(), ParameterSet::set1()), std::invalid_argument);
    fs::remove_all(dir);
}
