#pragma once

#include <filesystem>
#include <ostream>

#include <nlohmann/json.hpp>

namespace wslab::cli {

enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kInvalidInput = 2 };

/// Each command takes the merged config (file plus flag overrides), writes
/// its outputs and returns the output directory.
std::filesystem::path cmd_synth(const nlohmann::json& config, std::ostream& log);
std::filesystem::path cmd_train(const nlohmann::json& config, std::ostream& log);
std::filesystem::path cmd_baseline(const nlohmann::json& config, std::ostream& log);
std::filesystem::path cmd_robustness(const nlohmann::json& config, std::ostream& log);
std::filesystem::path cmd_ablate(const nlohmann::json& config, std::ostream& log);
std::filesystem::path cmd_eval(const nlohmann::json& config, std::ostream& log);

/// Full command line: parses flags, dispatches, maps exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wslab::cli
