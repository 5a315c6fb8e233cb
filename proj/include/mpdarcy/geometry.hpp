#pragma once

/**
 * @file geometry.hpp
 * @brief Voxelized periodic unit cell and resolved thin perforated slab.
 *
 * Both geometries are stored on a fully periodic staggered grid (MacGrid).
 * The thin slab is made non-periodic by appending one layer of solid cells
 * along every axis: every face touching that layer is inactive, which is
 * exactly the homogeneous Dirichlet closure on the slab boundary.
 */

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mpdarcy {

using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

enum class ObstacleKind { sphere, box, cylinder };

std::string_view to_string(ObstacleKind kind);
ObstacleKind parse_obstacle_kind(std::string_view name);

/// Obstacle T inside the reference cell Y = (-1/2, 1/2)^3, in cell units.
///
/// `size` holds the radius in size[0] for spheres, the three half-extents for
/// boxes, and (radius, half-length) in (size[0], size[1]) for cylinders whose
/// axis is `axis`.
struct ObstacleSpec {
    ObstacleKind kind = ObstacleKind::sphere;
    Vec3 center{0.0, 0.0, 0.0};
    Vec3 size{0.25, 0.0, 0.0};
    int axis = 2;

    static ObstacleSpec sphere(Vec3 center, double radius);
    static ObstacleSpec box(Vec3 center, Vec3 half_extents);
    static ObstacleSpec cylinder(Vec3 center, double radius, double half_length, int axis);

    /// Open-set membership test for a point in cell coordinates.
    bool contains(const Vec3& y) const;

    /// Half-extents of the axis-aligned bounding box.
    Vec3 bounding_half_extents() const;

    /// Canonical text used for hashing and reports.
    std::string canonical() const;

    bool operator==(const ObstacleSpec&) const = default;
};

/// Periodic staggered (MAC) grid with a per-cell fluid mask.
///
/// Faces normal to axis a are indexed by the cell whose lower a-face they
/// are. A face is active iff both adjacent cells (with periodic wrap) are
/// fluid. Active faces are numbered axis-major: all axis-0 faces, then
/// axis-1, then axis-2, each block in increasing cell index.
class MacGrid {
public:
    MacGrid() = default;
    MacGrid(Index3 dims, Vec3 spacing, std::vector<std::uint8_t> fluid);

    const Index3& dims() const noexcept { return dims_; }
    const Vec3& spacing() const noexcept { return spacing_; }
    double cell_volume() const noexcept { return spacing_[0] * spacing_[1] * spacing_[2]; }
    int num_cells() const noexcept { return dims_[0] * dims_[1] * dims_[2]; }

    int linear(int i, int j, int k) const noexcept { return i + dims_[0] * (j + dims_[1] * k); }
    Index3 coords(int cell) const noexcept;
    /// Cell index shifted by `delta` along `axis` with periodic wrap.
    int shifted(int cell, int axis, int delta) const noexcept;

    bool is_fluid(int cell) const noexcept { return fluid_[static_cast<std::size_t>(cell)] != 0; }
    const std::vector<std::uint8_t>& fluid_mask() const noexcept { return fluid_; }

    int num_fluid_cells() const noexcept { return static_cast<int>(fluid_cells_.size()); }
    int num_solid_cells() const noexcept { return num_cells() - num_fluid_cells(); }
    /// Dof of a fluid cell, -1 for solid cells.
    int cell_dof(int cell) const noexcept { return cell_dof_[static_cast<std::size_t>(cell)]; }
    int dof_cell(int dof) const noexcept { return fluid_cells_[static_cast<std::size_t>(dof)]; }

    bool face_active(int axis, int cell) const noexcept { return face_dof(axis, cell) >= 0; }
    /// Dof of the axis-`axis` face at the lower side of `cell`, -1 if inactive.
    int face_dof(int axis, int cell) const noexcept
    {
        return face_dof_[static_cast<std::size_t>(axis)][static_cast<std::size_t>(cell)];
    }
    int num_active_faces() const noexcept { return static_cast<int>(face_axis_.size()); }
    int num_active_faces(int axis) const noexcept
    {
        return face_offset_[static_cast<std::size_t>(axis) + 1] - face_offset_[static_cast<std::size_t>(axis)];
    }
    int face_offset(int axis) const noexcept { return face_offset_[static_cast<std::size_t>(axis)]; }
    int dof_face_axis(int dof) const noexcept { return face_axis_[static_cast<std::size_t>(dof)]; }
    int dof_face_cell(int dof) const noexcept { return face_cell_[static_cast<std::size_t>(dof)]; }

    /// Position of a face center, with cell (0,0,0) spanning [origin, origin+h).
    Vec3 face_center(int axis, int cell, const Vec3& origin) const noexcept;
    Vec3 cell_center(int cell, const Vec3& origin) const noexcept;

    bool same_layout(const MacGrid& other) const noexcept;

private:
    Index3 dims_{0, 0, 0};
    Vec3 spacing_{0.0, 0.0, 0.0};
    std::vector<std::uint8_t> fluid_;
    std::vector<int> cell_dof_;
    std::vector<int> fluid_cells_;
    std::array<std::vector<int>, 3> face_dof_;
    std::array<int, 4> face_offset_{0, 0, 0, 0};
    std::vector<int> face_axis_;
    std::vector<int> face_cell_;
};

/// Discretized unit cell Y with obstacle T; fluid part Y_f = Y \ T.
struct CellGeometry {
    ObstacleSpec obstacle;
    bool has_obstacle = true;
    int n = 0;
    double spacing = 0.0;
    MacGrid grid;
    double porosity = 0.0;

    /// Lower corner of the reference cell.
    static constexpr Vec3 origin{-0.5, -0.5, -0.5};

    bool cell_mask(int i, int j, int k) const { return grid.is_fluid(grid.linear(i, j, k)); }
};

/// Builds the voxelized unit cell by cell-center membership against T.
///
/// Throws ObstacleTouchesBoundary, EmptyObstacle or EmptyFluid.
CellGeometry build_cell_geometry(const ObstacleSpec& shape, int n);

/// Obstacle-free periodic cell. Used for operator consistency checks; the
/// micropolar system assembled on it is singular.
CellGeometry build_fluid_cell(int n);

/// Resolved thin perforated slab omega x (0, h) with obstacles eps*k + eps*T.
///
/// The eps-lattice is aligned with the slab corner: lattice block k spans
/// eps*[k, k+1) along every axis.
struct ThinDomainGeometry {
    double eps = 0.0;
    double h = 0.0;
    std::array<double, 2> omega_extent{1.0, 1.0};
    int cells_per_period = 0;
    ObstacleSpec obstacle;

    /// Cells of the slab (without the solid padding layer).
    Index3 interior{0, 0, 0};
    Vec3 spacing{0.0, 0.0, 0.0};
    /// Number of eps-blocks per axis; the vertical count includes a partial
    /// top block when h/eps is not an integer.
    Index3 blocks{0, 0, 0};
    /// Lattice indices of the stamped obstacle copies.
    std::vector<Index3> obstacle_copies;

    /// Padded periodic grid of (interior + 1) cells per axis.
    MacGrid grid;

    static constexpr Vec3 origin{0.0, 0.0, 0.0};

    int interior_linear(int i, int j, int k) const noexcept
    {
        return i + interior[0] * (j + interior[1] * k);
    }
    int padded_cell(int i, int j, int k) const noexcept { return grid.linear(i, j, k); }
    int num_interior_cells() const noexcept { return interior[0] * interior[1] * interior[2]; }
    bool interior_fluid(int i, int j, int k) const { return grid.is_fluid(grid.linear(i, j, k)); }
};

ThinDomainGeometry build_thin_domain(std::array<double, 2> omega_extent, double eps, double h,
                                     const ObstacleSpec& shape, int cells_per_period);

/// Writes the cell mask as a legacy VTK STRUCTURED_POINTS ASCII file.
void write_mask_vtk(const std::string& path, const CellGeometry& geom);
void write_mask_vtk(const std::string& path, const ThinDomainGeometry& geom);

}  // namespace mpdarcy
