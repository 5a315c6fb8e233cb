#pragma once

/**
 * @file resolved.hpp
 * @brief Full micropolar solve on the resolved thin perforated slab.
 *
 * Physical variables on omega x (0, h): the microrotation viscosity is
 * R_M = eps^2 Rc, the forces are f = (f'(x'), 0) and g = eps (g'(x'), 0).
 * Expected sizes: |u| ~ eps^2 h^{1/2}, |Du| ~ eps h^{1/2}, |w| ~ eps h^{1/2},
 * |Dw| ~ h^{1/2}.
 */

#include "mpdarcy/darcy.hpp"
#include "mpdarcy/forces.hpp"
#include "mpdarcy/geometry.hpp"
#include "mpdarcy/saddle_solver.hpp"

#include <array>
#include <string>
#include <vector>

namespace mpdarcy {

struct ResolvedNorms {
    double u = 0.0;   ///< sqrt(V sum u^2)
    double Du = 0.0;  ///< sqrt(V u^T A u)
    double w = 0.0;
    double Dw = 0.0;
};

struct ResolvedRun {
    const ThinDomainGeometry* geometry = nullptr;
    PhysicalParams params;  ///< Rc of the cell scale; the solve uses eps^2 Rc
    double R_M = 0.0;
    ForceField f_prime;
    ForceField g_prime;
    Vector u;
    Vector w;
    Vector p;
    SolveStats stats;
    ResolvedNorms norms;
    double energy_residual = 0.0;
    double divergence = 0.0;  ///< |D u| / |rhs|
};

/// Throws NoConvergence when the solve fails.
ResolvedRun solve_resolved(const ThinDomainGeometry& geom, const PhysicalParams& params, const ForceField& f_prime,
                           const ForceField& g_prime, const SolverOptions& options);

struct ScalingRow {
    double eps = 0.0;
    double h = 0.0;
    ResolvedNorms norms;
    /// |u|/(eps^2 h^1/2), |Du|/(eps h^1/2), |w|/(eps h^1/2), |Dw|/h^1/2.
    std::array<double, 4> ratios{};
};

struct ScalingReport {
    std::vector<ScalingRow> rows;  ///< sorted by decreasing eps
    double h_slope = 0.0;          ///< d log h / d log eps
    std::array<double, 4> slopes{};  ///< fitted d log norm / d log eps
    std::array<double, 4> theory{};  ///< (2, 1, 1, 0) + h_slope / 2
    std::array<bool, 4> pass{};      ///< slope >= theory - 0.4
    std::array<bool, 4> in_band{};   ///< |slope - theory| <= 0.4
    std::array<double, 4> ratio_spread{};  ///< max / min of the normalized ratio
    bool bounded = false;  ///< ratio spread of |u| and |w| within a factor 2
    static constexpr double slope_tolerance = 0.4;
    static constexpr double ratio_band = 2.0;
};

ScalingRow make_scaling_row(double eps, double h, const ResolvedNorms& norms);
/// Throws InsufficientRuns unless at least two distinct eps are present.
ScalingReport scaling_report(std::vector<ScalingRow> rows);
ScalingReport scaling_report(const std::vector<ResolvedRun>& runs);

void write_scaling_csv(const std::string& path, const ScalingReport& report);

struct DarcyComparison {
    int blocks = 0;
    double resolved_velocity_norm = 0.0;  ///< RMS of eps^-2 block averages of u'
    double macro_velocity_norm = 0.0;     ///< RMS of block averages of U'
    double velocity_difference = 0.0;     ///< relative L2 difference (absolute RMS if U' is below 1e-12)
    double resolved_rotation_norm = 0.0;  ///< RMS of eps^-1 block averages of w'
    double macro_rotation_norm = 0.0;
    double rotation_difference = 0.0;
};

/// Block averages of the resolved field over eps x eps x (0, h) columns,
/// scaled by eps^-2 (velocity) and eps^-1 (microrotation), against the
/// block-averaged macro fields.
///
/// Throws IncompatibleInputs when physics, forces, obstacle or omega differ.
DarcyComparison compare_with_darcy(const ResolvedRun& run, const MacroSolution& macro);

}  // namespace mpdarcy
