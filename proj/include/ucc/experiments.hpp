#pragma once

#include <string>
#include <vector>

#include "ucc/config.hpp"

namespace ucc {

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
};

struct RunResult {
    int exit_code = 0;  // 0 ok, 2 config, 3 numeric, 4 embedded acceptance check failed
    std::string message;
    std::vector<std::string> output_files;
};

// Load + validate + dispatch one experiment; writes results/summary/manifest.
RunResult run_experiment_file(const std::string& config_path, const CliOverrides& ov);

// Validation only; diagnostics returned (empty = runnable).
std::vector<std::string> validate_experiment_file(const std::string& config_path);

}  // namespace ucc
