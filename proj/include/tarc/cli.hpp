#ifndef TARC_CLI_HPP_
#define TARC_CLI_HPP_

#include <string>
#include <vector>

#include "tarc/config.hpp"

namespace tarc {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitTrainingFailure = 3;
inline constexpr int kExitArtifactMismatch = 4;

// Entry point behind the `tarc` binary; also callable from tests.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

// Subcommand implementations. Each returns an exit code.
int cmd_train(const RunConfig& cfg, int workers);
int cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path, int episodes,
             const std::string& out_dir, bool deterministic);
int cmd_sweep(const RunConfig& cfg, std::vector<double> switch_costs, int workers);
int cmd_perturb(const RunConfig& cfg, const std::string& checkpoint_path,
                const std::string& out_dir);

}  // namespace tarc

#endif  // TARC_CLI_HPP_
