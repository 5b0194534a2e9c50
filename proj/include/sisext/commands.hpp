#pragma once

// Command implementations behind the CLI. Each writes its report to the
// configured output (a file when config.out is set, else `out`), writes
// warnings and errors to `err`, and returns a process exit code.

#include "sisext/config.hpp"

#include <iosfwd>
#include <stdexcept>

namespace sisext {

enum ExitCode : int {
    exit_ok = 0,
    exit_check_failed = 1,
    exit_usage = 2,
    exit_runtime = 3,
};

/// Invalid combination of options; reported as a usage error.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Largest N accepted by cmd_exact_mean.
inline constexpr std::int64_t exact_mean_max_n = 10'000'000;

int cmd_predict(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& config, unsigned threads, std::ostream& out, std::ostream& err);
int cmd_exact_mean(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_validate(const RunConfig& config, unsigned threads, std::ostream& out, std::ostream& err);

/// Dispatches on config.command and maps exceptions to exit codes.
int run_command(const RunConfig& config, unsigned threads, std::ostream& out, std::ostream& err);

}  // namespace sisext
