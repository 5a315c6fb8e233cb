#pragma once

/**
 * @file cell.hpp
 * @brief Periodic micropolar cell problems and the effective 2x2 matrices.
 *
 * Problem (i, k) forces the u-equation (k = 1) or the w-equation (k = 2)
 * with the in-plane unit vector e_i = (delta_1i, delta_2i, 0). For i = 3 the
 * forcing vanishes and so does the solution.
 *
 *   (K_k)_ij = int_{Y_f} u^{j,k}_i dy,   (L_k)_ij = int_{Y_f} w^{j,k}_i dy,   i, j in {1, 2}
 */

#include "mpdarcy/geometry.hpp"
#include "mpdarcy/saddle_solver.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace mpdarcy {

struct MicropolarCellSolution {
    int i = 1;  ///< force direction, 1..3
    int k = 1;  ///< 1 forces the momentum equation, 2 the microrotation equation
    const CellGeometry* geometry = nullptr;
    PhysicalParams params;
    double tol = 0.0;
    StaggeredVectorField u;
    StaggeredVectorField w;
    CenterScalarField pi;
    SolveStats stats;
};

/// Face right-hand sides (rhs_u, rhs_w) of problem (i, k).
std::pair<Vector, Vector> cell_forcing(const MacGrid& grid, int i, int k);

/// Solves one problem on an already assembled system of `geom`.
MicropolarCellSolution solve_cell_problem(const MicropolarSystem& system, const CellGeometry& geom, int i, int k,
                                          const SolverOptions& options);
MicropolarCellSolution solve_cell_problem(const CellGeometry& geom, const PhysicalParams& params, int i, int k,
                                          const SolverOptions& options);

/// All six problems, (i, k) in {1,2,3} x {1,2} ordered i-major, solved
/// concurrently on one shared system. Throws NoConvergence if any fails.
std::vector<MicropolarCellSolution> solve_all_cell_problems(const CellGeometry& geom, const PhysicalParams& params,
                                                            const SolverOptions& options);

struct PermeabilityResiduals {
    double k1_symmetry = 0.0;   ///< |K1 - K1^T| / |K1|
    double l2_symmetry = 0.0;   ///< |L2 - L2^T| / |L2|
    double k2_symmetry = 0.0;   ///< |K2 - K2^T| / |K1|, reported only
    double k2_l1_transpose = 0.0;  ///< |K2 - L1^T| / |K1|, reported only
    double k1_min_eigenvalue = 0.0;
    double trivial_norm = 0.0;  ///< max over k of |u^{3,k}| + |w^{3,k}|
    double max_divergence = 0.0;
};

struct PermeabilitySet {
    Eigen::Matrix2d K1 = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d K2 = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d L1 = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d L2 = Eigen::Matrix2d::Zero();
    PhysicalParams params;
    ObstacleSpec obstacle;
    bool has_obstacle = true;
    int n = 0;
    double tol = 0.0;
    PermeabilityResiduals residuals;

    /// Hash of the obstacle and the resolution.
    std::string geometry_fingerprint() const;
    /// Hash of geometry and physical parameters; keys the permeability cache.
    std::string fingerprint() const;
};

std::string geometry_fingerprint(const ObstacleSpec& obstacle, int n);
std::string permeability_fingerprint(const ObstacleSpec& obstacle, int n, const PhysicalParams& params);

/// Integrates the six solutions into K1, K2, L1, L2 and checks the
/// structural properties.
///
/// Throws InconsistentInputs when the solutions do not form one complete
/// set, InvariantViolation when K1 or L2 is not symmetric to 1e-8, K1 is
/// not positive definite, or an i = 3 solution is not zero.
PermeabilitySet compute_permeabilities(const std::vector<MicropolarCellSolution>& solutions);

/// Convenience: geometry -> six solves -> matrices.
PermeabilitySet compute_permeabilities(const CellGeometry& geom, const PhysicalParams& params,
                                       const SolverOptions& options);

}  // namespace mpdarcy
