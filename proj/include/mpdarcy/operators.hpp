#pragma once

/**
 * @file operators.hpp
 * @brief Staggered-grid gradient, divergence, vector Laplacian, rot and mass.
 *
 * Layout: pressure at cell centers, every vector unknown (velocity and
 * microrotation alike) on faces, component a on faces normal to axis a.
 * All matrices act on active dofs only; inactive faces carry the value zero.
 *
 * The rot operator is R = P * C, where C is the edge-valued staggered curl
 * of the zero-extended face field and P averages edge values onto faces
 * (two-point interpolation along each axis). On the periodic torus
 *   |C u|^2 + |D u|^2 = <A u, u>
 * holds exactly, and |P| <= 1, so |R u|^2 <= <A u, u> - |D u|^2.
 *
 * Every face, cell and edge carries the same control volume V, so the
 * weighted adjoint of each operator is its plain transpose.
 */

#include "mpdarcy/geometry.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>

namespace mpdarcy {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class BoundaryClosure { periodic, dirichlet_box };

struct DiscreteOperatorSet {
    const MacGrid* grid = nullptr;
    BoundaryClosure closure = BoundaryClosure::periodic;
    SparseMatrix G;   ///< cells -> faces, (p_c - p_{c-e_a}) / h_a
    SparseMatrix D;   ///< faces -> cells, exactly -G^T
    SparseMatrix A;   ///< componentwise 7-point -Laplacian, inactive neighbours are zero
    SparseMatrix R;   ///< faces -> faces, rot
    SparseMatrix Rt;  ///< transpose of R, used wherever rot acts on the microrotation
    double volume = 0.0;  ///< per-dof control volume; mass matrix is volume * I

    int num_faces() const { return static_cast<int>(A.rows()); }
    int num_cells() const { return static_cast<int>(G.cols()); }

    /// Weighted inner product on faces or cells.
    double inner(const Vector& a, const Vector& b) const { return volume * a.dot(b); }
};

DiscreteOperatorSet build_operators(const MacGrid& grid, BoundaryClosure closure);
DiscreteOperatorSet build_operators(const CellGeometry& geom);
DiscreteOperatorSet build_operators(const ThinDomainGeometry& geom);

/// Edge-valued curl on the full torus (3 * cells rows, active-face columns).
/// Exposed for the exact curl/div/gradient identity checks.
SparseMatrix build_edge_curl(const MacGrid& grid);

struct StaggeredVectorField {
    const MacGrid* grid = nullptr;
    Vector values;  ///< active face dofs

    double component_value(int axis, int cell) const
    {
        const int dof = grid->face_dof(axis, cell);
        return dof < 0 ? 0.0 : values[dof];
    }
};

struct CenterScalarField {
    const MacGrid* grid = nullptr;
    Vector values;  ///< fluid cell dofs
    bool mean_zero = false;
};

/// Samples f(x)[a] at the center of every active face of component a.
Vector sample_faces(const MacGrid& grid, const Vec3& origin, const std::function<Vec3(const Vec3&)>& f);
/// Samples a scalar at fluid cell centers.
Vector sample_cells(const MacGrid& grid, const Vec3& origin, const std::function<double(const Vec3&)>& f);
/// Unit value on every active face of component `axis`, zero elsewhere.
Vector unit_component(const MacGrid& grid, int axis);

/// <R a, b>_M. Throws GeometryMismatch when the fields live on different grids.
double rot_energy_pairing(const DiscreteOperatorSet& ops, const StaggeredVectorField& a,
                          const StaggeredVectorField& b);

/// Volume integral of component `axis` with face-to-cell averaging.
double integrate_component(const MacGrid& grid, const Vector& face_values, int axis);

}  // namespace mpdarcy
