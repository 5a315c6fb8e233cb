#pragma once

/**
 * @file unfolding.hpp
 * @brief Discrete unfolding of fields on the dilated thin slab.
 *
 * The dilated slab omega x (0, 1) is cut into blocks of horizontal size eps
 * and vertical size eps/h. The block of a point z is
 *   kappa(z'/eps, h z3/eps),
 * used in every slot. On a grid with m cells per block and axis the
 * unfolded field of block k at local cell l in Y is the slab value at cell
 * m k + l; the unfolding is a pure reindexing.
 *
 * Quadrature is cellwise constant: a slab cell carries dx dy dz/h, a local
 * cell of block k carries (eps^3/h) / m^3.
 */

#include "mpdarcy/geometry.hpp"

#include <Eigen/Core>

#include <vector>

namespace mpdarcy {

/// Lattice block of a point of the dilated slab.
/// Throws OnCellBoundary when a scaled coordinate is within 1e-12 of an integer.
Index3 kappa(const Vec3& z, double eps, double h);

struct UnfoldedField {
    double eps = 0.0;
    double h = 0.0;
    int m = 0;
    Index3 blocks{0, 0, 0};
    /// blocks * m^3 values, block-major; local index l0 + m (l1 + m l2).
    std::vector<double> values;

    int block_linear(int k0, int k1, int k2) const { return k0 + blocks[0] * (k1 + blocks[1] * k2); }
    int local_linear(int l0, int l1, int l2) const { return l0 + m * (l1 + m * l2); }
    double at(int block, int local) const
    {
        return values[static_cast<std::size_t>(block) * static_cast<std::size_t>(m * m * m) +
                      static_cast<std::size_t>(local)];
    }
    int num_blocks() const { return blocks[0] * blocks[1] * blocks[2]; }
};

/// Unfolds a cell field given on the slab interior cells (index i + nx (j + ny k)).
///
/// Throws IncompatibleTiling unless the vertical spacing equals eps/m and
/// the slab is tiled by whole blocks in-plane. A partial top block is
/// extended by zero.
UnfoldedField unfold(const ThinDomainGeometry& geom, const std::vector<double>& slab_values);

/// Inverse reindexing of unfold.
std::vector<double> fold(const ThinDomainGeometry& geom, const UnfoldedField& field);

/// Face component `axis` averaged onto the slab interior cells.
std::vector<double> slab_cell_values(const ThinDomainGeometry& geom, const Eigen::VectorXd& face_values, int axis);

/// L2 norms under the cellwise quadrature.
double slab_norm(const ThinDomainGeometry& geom, const std::vector<double>& slab_values);
double unfolded_norm(const UnfoldedField& field);

/// One-sided difference norms over pairs inside one block.
/// `axis` 0/1 differentiates in z' (slab) or y' (unfolded); axis 2 in z3 or y3.
double slab_derivative_norm(const ThinDomainGeometry& geom, const std::vector<double>& slab_values, int axis);
double unfolded_derivative_norm(const UnfoldedField& field, int axis);

struct UnfoldingCheck {
    double norm_identity = 0.0;       ///< relative defect of |u_hat| = |u_tilde|
    double horizontal_identity = 0.0;  ///< relative defect of |grad_y' u_hat| = eps |grad_z' u_tilde|
    double vertical_identity = 0.0;    ///< relative defect of |d_y3 u_hat| = (eps/h) |d_z3 u_tilde|
    bool fold_roundtrip = false;       ///< fold(unfold(u)) == u bitwise
};

UnfoldingCheck check_unfolding_identities(const ThinDomainGeometry& geom, const std::vector<double>& slab_values);

}  // namespace mpdarcy
