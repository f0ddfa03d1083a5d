// rplab <command> --config <path> [--out <dir>] [--seed <int>]

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rplab/commands.hpp"
#include "rplab/config.hpp"
#include "rplab/kernels/kernels.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quadratic-certificate reduction laboratory for delay and parabolic cocycles"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string isa = "auto";

  std::string names;
  for (const std::string& n : rplab::command_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("command", command, "One of: " + names)->required()->check(CLI::IsMember(rplab::command_names()));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "Output directory (overrides output.directory)");
  app.add_option("--seed", seed, "Random seed (overrides analysis.seed)");
  app.add_option("--isa", isa, "Kernel variant")->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rplab::kExitInputError;
  }

  if (isa == "scalar") rplab::kernels::set_active_isa(rplab::kernels::Isa::Scalar);
  if (isa == "avx2") rplab::kernels::set_active_isa(rplab::kernels::Isa::Avx2);

  rplab::RunConfig cfg;
  try {
    cfg = rplab::parse_config(config_path);
  } catch (const rplab::Error& e) {
    std::cerr << e.what() << '\n';
    if (!out_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(out_dir, ec);
      nlohmann::json rec = {{"command", command},
                            {"status", "fail"},
                            {"exit_code", rplab::kExitInputError},
                            {"error", {{"code", std::string(rplab::to_string(e.code()))}, {"message", e.what()}}}};
      std::ofstream(std::filesystem::path(out_dir) / "summary.json") << rec.dump(2) << '\n';
    }
    return rplab::kExitInputError;
  }
  if (seed) cfg.analysis.seed = *seed;
  if (!out_dir.empty()) cfg.output.directory = out_dir;

  const rplab::CommandResult res = rplab::run_command(command, cfg, cfg.output.directory);
  std::cout << res.summary.dump(2) << '\n';
  return res.exit_code;
}
