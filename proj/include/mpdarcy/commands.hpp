#pragma once

/**
 * @file commands.hpp
 * @brief Subcommands behind the mpdarcy executable.
 *
 * Each command writes its artifacts into the output directory together
 * with a JSON report listing every emitted file and its FNV-1a hash.
 * run_command maps failures to exit codes: 1 numerical, 2 configuration
 * or I/O; the error goes to `err` as one line "error[Code]: message".
 */

#include "mpdarcy/cell.hpp"
#include "mpdarcy/config.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace mpdarcy {

struct CommandOptions {
    std::string config_path;  ///< empty selects the built-in defaults
    std::string out_dir;      ///< overrides output.directory when non-empty
    std::string perm_path;    ///< cmd_darcy input; defaults to <out>/permeability.json
    bool full = false;        ///< validate: include the resolved eps-sweep
    std::optional<std::string> format;  ///< csv, vtk or both
    bool plot = false;
};

nlohmann::json permeability_to_json(const PermeabilitySet& p);
PermeabilitySet permeability_from_json(const nlohmann::json& j);
void write_permeability_file(const std::string& path, const PermeabilitySet& p);
/// Throws IOError naming the path when it does not exist or cannot be parsed.
PermeabilitySet read_permeability_file(const std::string& path);

/// Each returns the run report and writes it as <out>/<name>_report.json.
nlohmann::json cmd_cell(const RunConfig& cfg);
nlohmann::json cmd_darcy(const RunConfig& cfg, const std::string& perm_path);
nlohmann::json cmd_pipeline(const RunConfig& cfg);
nlohmann::json cmd_validate(const RunConfig& cfg, bool full);

/// Loads the config, applies the option overrides and dispatches.
int run_command(const std::string& name, const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace mpdarcy
