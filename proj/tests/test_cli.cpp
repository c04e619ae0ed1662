#include "eos/cli.hpp"

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using eos::cli::run;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path scratch_dir() {
    const fs::path d = fs::temp_directory_path() / "eos_cli_test";
    fs::create_directories(d);
    return d;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        n += c == '\n';
    return n;
}

} // namespace

TEST_CASE("sweep-n writes 60 rows and a manifest") {
    const auto dir = scratch_dir();
    const auto out = dir / "sweep.csv";
    std::ostringstream o, e;
    REQUIRE(run({"sweep-n", "--set", "1", "--out", out.string()}, o, e) == 0);
    const auto csv = slurp(out);
    CHECK(count_lines(csv) == 61);
    CHECK(csv.rfind("N,rms_total_per_photon", 0) == 0);
    const auto man = json::parse(slurp(out.string() + ".manifest.json"));
    CHECK(man["command"] == "sweep-n");
    CHECK(man["outputs"][0] == out.string());
    CHECK(man.contains("hash"));
    CHECK(man.contains("tolerances"));

    // Identical inputs give byte-identical data and the same hash.
    const auto out2 = dir / "sweep2.csv";
    REQUIRE(run({"sweep-n", "--set", "1", "--out", out.string()}, o, e) == 0);
    CHECK(slurp(out) == csv);
    CHECK(json::parse(slurp(out.string() + ".manifest.json"))["hash"] == man["hash"]);
    REQUIRE(run({"sweep-n", "--set", "1", "--out", out2.string()}, o, e) == 0);
    CHECK(slurp(out2) == csv);
    // No temporary files are left behind.
    for (const auto& ent : fs::directory_iterator(dir))
        CHECK(ent.path().extension() != ".tmp");
    fs::remove_all(dir);
}

TEST_CASE("usage errors exit with 2") {
    std::ostringstream o, e;
    CHECK(run({"sweep-n", "--no-such-flag"}, o, e) == 2);
    CHECK(run({"sweep-n", "--set", "3"}, o, e) == 2);
    CHECK(run({}, o, e) == 2);
    CHECK(run({"sweep-n", "--config", "/nonexistent/eos.toml"}, o, e) == 2);
    CHECK(run({"sweep-n", "--n-from", "-1"}, o, e) == 2);
}

TEST_CASE("json output and stdout") {
    std::ostringstream o, e;
    REQUIRE(run({"sweep-n", "--points", "5", "--format", "json"}, o, e) == 0);
    const auto j = json::parse(o.str());
    CHECK(j["rows"].size() == 5);
    CHECK(j["columns"][0] == "N");

    std::ostringstream o2;
    REQUIRE(run({"chi3"}, o2, e) == 0);
    CHECK(count_lines(o2.str()) == 2);
}

TEST_CASE("config is taken from EOS_CONFIG when no flag is given") {
    const auto dir = scratch_dir();
    const auto cfg = dir / "c.toml";
    std::ofstream(cfg) << "[crystal]\nlength_um = 14.0\n";
    std::ostringstream a, b, e;
    REQUIRE(run({"sweep-n", "--points", "3"}, a, e) == 0);
    ::setenv("EOS_CONFIG", cfg.c_str(), 1);
    REQUIRE(run({"sweep-n", "--points", "3"}, b, e) == 0);
    ::unsetenv("EOS_CONFIG");
    CHECK(a.str() != b.str());
    std::ostringstream c;
    REQUIRE(run({"sweep-n", "--points", "3", "--config", cfg.string()}, c, e) == 0);
    CHECK(c.str() == b.str());
    fs::remove_all(dir);
}

TEST_CASE("oracle reports numerical and closed-form values") {
    std::ostringstream o, e;
    REQUIRE(run({"oracle", "--alpha", "1.0", "--A-re", "0.02", "--C-im", "0.01", "--exact"}, o, e) == 0);
    const auto j = json::parse(o.str());
    const double num = j["perturbative"]["variance"], cf = j["closed_form"]["variance"];
    CHECK(std::abs(num - cf) < 1e-12);
    CHECK(j.contains("exact"));

    std::ostringstream o2;
    REQUIRE(run({"oracle", "--channels", "2", "--A-re", "0.02"}, o2, e) == 0);
    CHECK(json::parse(o2.str()).contains("two_channel"));
}

TEST_CASE("selftest passes") {
    std::ostringstream o, e;
    CHECK(run({"selftest"}, o, e) == 0);
    CHECK(o.str().find("FAIL") == std::string::npos);
}
