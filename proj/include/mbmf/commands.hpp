#ifndef MBMF_COMMANDS_HPP
#define MBMF_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace mbmf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point for the `mbmf` tool. Subcommands: train, evaluate, predict,
/// variance, synth, magnitudes. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mbmf::cli

#endif  // MBMF_COMMANDS_HPP
