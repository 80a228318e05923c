#pragma once

#include <iosfwd>
#include <string>

#include "isolab/json_io.hpp"

namespace isolab::cli {

// Resolved run configuration: command name plus a flat parameter object
// (paths, numbers, rationals). Values from --config override flag values.
struct RunConfig {
    std::string command;
    io::json params;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBudget = 3;

// Dispatches to the module operations, writes the report envelope to
// params["out"] (or `fallback_out`), and returns the exit code.
int run(const RunConfig& cfg, std::ostream& fallback_out);

// Full command line entry point.
int main_entry(int argc, const char* const* argv);

}  // namespace isolab::cli
