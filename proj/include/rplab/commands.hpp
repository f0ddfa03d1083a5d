#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rplab/config.hpp"
#include "rplab/error.hpp"

namespace rplab {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitInputError = 4;

int exit_code_for(ErrorCode code);

const std::vector<std::string>& command_names();

struct CommandResult {
  int exit_code = kExitPass;
  nlohmann::json summary;
};

/// Runs one command and writes summary.json, effective_config.json and the
/// detail tables of the stages involved into out_dir. Errors are caught and
/// recorded in the summary.
CommandResult run_command(const std::string& cmd, const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace rplab
