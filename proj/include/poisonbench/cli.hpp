#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace poisonbench {

/// Process exit codes shared by all commands.
enum ExitCode : int { kExitOk = 0, kExitJobFailed = 1, kExitBadInput = 2 };

/// Name of the environment variable holding the default output root.
inline constexpr const char* kOutDirEnv = "POISONBENCH_OUT";
inline constexpr const char* kDefaultOutDir = "poisonbench_out";

/// Precedence: command-line flag, manifest field, environment variable, built-in default.
std::string resolve_out_dir(const std::optional<std::string>& flag, const std::string& manifest_value,
                            const char* env_value);

struct RunCommand {
  std::string manifest_path;
  std::optional<std::string> out_dir;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed_override;
  bool dump_tables = false;  ///< also write <id>.tables.json for LCB-H runs
};
int cmd_run(const RunCommand& command, std::ostream& out, std::ostream& err);

struct SolveCommand {
  std::string spec_path;
  std::optional<std::string> target_path;
  std::optional<std::uint64_t> target_seed;
  std::optional<std::uint64_t> seed_override;  ///< replaces target_seed
  bool json = false;
};
int cmd_solve(const SolveCommand& command, std::ostream& out, std::ostream& err);

struct SummaryCommand {
  std::vector<std::string> csv_paths;
  std::optional<std::uint64_t> seed_override;  ///< keeps only rows with this seed
};
int cmd_summary(const SummaryCommand& command, std::ostream& out, std::ostream& err);

struct GenerateCommand {
  std::string kind;  ///< grid1d, grid2d, random, two_state
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> seed_override;
  int num_states = 4;
  int num_actions = 3;
  int horizon = 3;
  std::optional<std::string> out_path;
};
int cmd_generate(const GenerateCommand& command, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace poisonbench
