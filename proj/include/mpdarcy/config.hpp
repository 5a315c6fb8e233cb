#pragma once

/**
 * @file config.hpp
 * @brief JSON run configuration with schema validation.
 *
 * {
 *   "geometry":   {"kind": "sphere", "center": [0,0,0], "size": [0.25,0,0], "axis": 2, "n": 16},
 *   "params":     {"N2": 0.5, "Rc": 1.0},
 *   "macro":      {"omega": [1,1], "grid": [64,64],
 *                  "f": {"preset": "solenoidal_sine", "amplitude": 1.0},
 *                  "g": {"preset": "zero"}},
 *   "solver":     {"tol": 1e-10, "max_iter": 0, "preconditioner": "block_jacobi"},
 *   "validation": {"eps": [0.25, 0.125], "m": 8, "h_rule": "sqrt",
 *                  "unfolding": {"eps": 0.25, "h": 0.5, "m": 8}},
 *   "output":     {"directory": "out", "formats": ["csv"], "plot": false}
 * }
 *
 * Every section and key is optional and defaults as above. A force is
 * {"preset": name, "amplitude": a, "value": [v1, v2]} or {"csv": path}.
 * h_rule is "sqrt" (h = sqrt(eps)) or a number (fixed h). Unknown keys are
 * rejected.
 */

#include "mpdarcy/darcy.hpp"
#include "mpdarcy/forces.hpp"
#include "mpdarcy/geometry.hpp"
#include "mpdarcy/saddle_solver.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace mpdarcy {

struct ForceConfig {
    ForcePreset preset = ForcePreset::zero;
    double amplitude = 1.0;
    Vec2 value{1.0, 0.0};
    std::string csv;  ///< non-empty selects CSV samples

    ForceField resolve(const MacroGrid& grid) const;
};

struct RunConfig {
    ObstacleSpec obstacle = ObstacleSpec::sphere({0.0, 0.0, 0.0}, 0.25);
    int n = 16;
    PhysicalParams params;

    MacroGrid macro;
    ForceConfig f{ForcePreset::solenoidal_sine, 1.0, {1.0, 0.0}, {}};
    ForceConfig g;

    SolverOptions solver;

    std::vector<double> eps{0.25, 0.125};
    int m = 8;
    bool h_sqrt = true;
    double h_fixed = 0.5;
    double unfold_eps = 0.25;
    double unfold_h = 0.5;
    int unfold_m = 8;

    std::string out_dir = "out";
    bool write_csv = true;
    bool write_vtk = false;
    bool plot = false;

    double h_for(double e) const;
};

/// Parses and validates; relative CSV paths resolve against `base_dir`.
/// Throws ConfigError (unknown key, wrong type, out-of-range value) or
/// PreconditionViolated for physical parameters.
RunConfig parse_config(const nlohmann::json& j, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Canonical JSON echo of a configuration (all defaults filled in).
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace mpdarcy
