#pragma once

/**
 * @file darcy.hpp
 * @brief Homogenized 2D Darcy law on a rectangle and two-scale reconstruction.
 *
 *   div( K1 (f' - grad p) + K2 g' ) = 0  in omega,  zero normal flux on the boundary,
 *   U' = K1 (f' - grad p) + K2 g',       W' = L1 (f' - grad p) + L2 g'.
 *
 * Cell-centered finite volumes from the symmetric form
 *   a(p, v) = sum_x-faces K11 dp dv + sum_y-faces K22 dp dv
 *           + sum_interior-vertices K12 (gx_p gy_v + gy_p gx_v),
 * with vertex gradients averaged from the four surrounding cells. The force
 * enters through the same form, so any linear pressure is reproduced exactly.
 */

#include "mpdarcy/cell.hpp"
#include "mpdarcy/forces.hpp"

#include <Eigen/Core>

#include <array>
#include <string>
#include <vector>

namespace mpdarcy {

struct MacroGrid {
    Vec2 extent{1.0, 1.0};
    std::array<int, 2> cells{64, 64};

    double dx() const { return extent[0] / cells[0]; }
    double dy() const { return extent[1] / cells[1]; }
    int size() const { return cells[0] * cells[1]; }
    int index(int i1, int i2) const { return i1 + cells[0] * i2; }
    Vec2 center(int i1, int i2) const { return {(i1 + 0.5) * dx(), (i2 + 0.5) * dy()}; }
    /// Macro cell containing z (clamped to the grid).
    std::array<int, 2> locate(const Vec2& z) const;
};

struct MacroProblem {
    MacroGrid grid;
    ForceField f_prime;
    ForceField g_prime;
    PermeabilitySet perm;
};

struct FluxReport {
    int iterations = 0;
    double relative_residual = 0.0;  ///< |b - S p| / |b| of the pressure system
    double max_cell_flux = 0.0;      ///< max net discrete flux out of a cell, relative to the largest source
    double boundary_flux = 0.0;      ///< net flux through boundary faces
    double global_balance = 0.0;     ///< |sum of net cell fluxes|
    bool converged = false;
};

struct MacroSolution {
    MacroGrid grid;
    Vector p;  ///< cell-centered, mean-zero
    /// Cell-centered fields, each grid.size() x 2.
    Eigen::MatrixX2d U;
    Eigen::MatrixX2d W;
    /// f' - grad p at cell centers, the coefficient of K1 and L1.
    Eigen::MatrixX2d drive;
    /// g' at cell centers.
    Eigen::MatrixX2d g;
    std::string perm_fingerprint;
    PhysicalParams params;
    ObstacleSpec obstacle;
    std::string f_description;
    std::string g_description;
    FluxReport flux;
};

/// Throws NotPositiveDefinite unless K1 is symmetric positive definite,
/// PreconditionViolated for grids with fewer than 4 cells per axis,
/// NoConvergence if the pressure solve stalls.
MacroSolution solve_darcy(const MacroProblem& problem, double tol = 1e-10);

/// Two-scale fields of the identification
///   u(z, y) = sum_j (f_j - d_j p)(z) u^{j,1}(y) + g_j(z) u^{j,2}(y)
/// and likewise for w and pi.
class TwoScaleEvaluator {
public:
    /// Throws InconsistentInputs when the cell solutions do not belong to
    /// the permeability set the macro problem was solved with.
    TwoScaleEvaluator(const std::vector<MicropolarCellSolution>& cells, const MacroSolution& macro);

    struct CellFields {
        Vector u;   ///< active face values on the cell grid
        Vector w;
        Vector pi;  ///< fluid cell values
    };

    /// Fields at the macro cell containing z.
    CellFields fields(const Vec2& z) const;
    CellFields fields_at(int i1, int i2) const;

    struct PointValue {
        Vec3 u{0.0, 0.0, 0.0};
        Vec3 w{0.0, 0.0, 0.0};
        double pi = 0.0;
    };
    /// Point evaluation at cell coordinates y in (-1/2, 1/2)^3, taken from
    /// the containing voxel (faces averaged to its center); zero in T.
    PointValue evaluate(const Vec2& z, const Vec3& y) const;

    const CellGeometry& geometry() const { return *geom_; }

private:
    const CellGeometry* geom_ = nullptr;
    const MacroSolution* macro_ = nullptr;
    const MicropolarCellSolution* table_[2][2] = {};
};

/// CSV columns z1,z2,p,U1,U2,W1,W2, one row per macro cell.
void write_macro_csv(const std::string& path, const MacroSolution& sol);
void write_macro_vtk(const std::string& path, const MacroSolution& sol);
/// SVG image: pressure as color map plus a velocity quiver on a coarse sub-grid.
void write_macro_plot(const std::string& path, const MacroSolution& sol, int quiver_cells = 16);

}  // namespace mpdarcy
