#pragma once

#include "pareig/grid.hpp"
#include "pareig/io.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace pareig::cli {

/// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver ran but one of its quality gates failed (exit code 1).
class GateFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode { ok = 0, gate_failed = 1, bad_config = 2, runtime_failure = 3 };

/// Every numeric default used by a command, in one table. Keys missing from
/// a user config are filled from here; unknown top-level keys are rejected.
json default_config(const std::string& command);

/// Defaults merged with the user config (RFC 7386 merge patch).
json effective_config(const std::string& command, const json& user);

/// Reals may be written as numbers or as strings such as "2pi", "-pi",
/// "pi/2", "0.5*pi".
double parse_real(const json& j);

SpaceTimeGrid grid_from_config(const json& grid);

/// Formula objects ({"type": ...}); see the README for the catalogue.
TimeProfile time_profile_from_config(const json& f, const SpaceTimeGrid& g);
SpaceProfile space_profile_from_config(const json& f, const SpaceTimeGrid& g);
ScalarField field_from_config(const json& f, const SpaceTimeGrid& g);

/// Each command writes its artifacts under `out` and returns the metadata
/// that was written to out/metadata.json. GateFailure is thrown after all
/// artifacts have been written.
json cmd_solve(const json& config, const std::filesystem::path& out);
json cmd_optimize(const json& config, const std::filesystem::path& out);
json cmd_sweep(const json& config, const std::filesystem::path& out);
json cmd_gaussian_check(const json& config, const std::filesystem::path& out);

/// Loads the config (empty path means {}), applies overrides, runs the
/// command, and maps exceptions to exit codes. Failures also write
/// out/error.json. Diagnostics go to `log`.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const std::filesystem::path& out, const json& overrides, std::ostream& log);

}  // namespace pareig::cli
