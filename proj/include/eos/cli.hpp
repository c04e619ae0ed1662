#pragma once

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace eos::cli {

enum ExitCode : int { kOk = 0, kComputationError = 1, kUsageError = 2 };

// Record written next to every data file. The hash covers everything except timing.
struct RunManifest {
    std::string command;
    std::string parameter_set;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json tolerances = nlohmann::json::object();
    nlohmann::json convergence = nlohmann::json::object();
    std::vector<std::string> outputs;
    double wall_time_s = 0.0;

    nlohmann::json to_json() const;
    std::string hash() const;
};

// Writes `content` to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// 12 significant digits in scientific notation.
std::string format_number(double v);

// Entry point; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace eos::cli
