#include "mpdarcy/geometry.hpp"

#include "mpdarcy/error.hpp"
#include "mpdarcy/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mpdarcy {

std::string_view to_string(ObstacleKind kind)
{
    switch (kind) {
    case ObstacleKind::sphere: return "sphere";
    case ObstacleKind::box: return "box";
    case ObstacleKind::cylinder: return "cylinder";
    }
    return "sphere";
}

ObstacleKind parse_obstacle_kind(std::string_view name)
{
    if (name == "sphere") return ObstacleKind::sphere;
    if (name == "box") return ObstacleKind::box;
    if (name == "cylinder") return ObstacleKind::cylinder;
    throw Error(ErrorCode::config, "unknown obstacle kind '" + std::string(name) +
                                       "' (expected sphere, box or cylinder)");
}

ObstacleSpec ObstacleSpec::sphere(Vec3 center, double radius)
{
    return {ObstacleKind::sphere, center, {radius, 0.0, 0.0}, 2};
}

ObstacleSpec ObstacleSpec::box(Vec3 center, Vec3 half_extents)
{
    return {ObstacleKind::box, center, half_extents, 2};
}

ObstacleSpec ObstacleSpec::cylinder(Vec3 center, double radius, double half_length, int axis)
{
    return {ObstacleKind::cylinder, center, {radius, half_length, 0.0}, axis};
}

bool ObstacleSpec::contains(const Vec3& y) const
{
    const Vec3 d{y[0] - center[0], y[1] - center[1], y[2] - center[2]};
    switch (kind) {
    case ObstacleKind::sphere:
        return d[0] * d[0] + d[1] * d[1] + d[2] * d[2] < size[0] * size[0];
    case ObstacleKind::box:
        return std::abs(d[0]) < size[0] && std::abs(d[1]) < size[1] && std::abs(d[2]) < size[2];
    case ObstacleKind::cylinder: {
        double r2 = 0.0;
        for (int a = 0; a < 3; ++a)
            if (a != axis)
                r2 += d[static_cast<std::size_t>(a)] * d[static_cast<std::size_t>(a)];
        return r2 < size[0] * size[0] && std::abs(d[static_cast<std::size_t>(axis)]) < size[1];
    }
    }
    return false;
}

Vec3 ObstacleSpec::bounding_half_extents() const
{
    switch (kind) {
    case ObstacleKind::sphere:
        return {size[0], size[0], size[0]};
    case ObstacleKind::box:
        return size;
    case ObstacleKind::cylinder: {
        Vec3 e{size[0], size[0], size[0]};
        e[static_cast<std::size_t>(axis)] = size[1];
        return e;
    }
    }
    return size;
}

std::string ObstacleSpec::canonical() const
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s;c=%.17g,%.17g,%.17g;s=%.17g,%.17g,%.17g;axis=%d",
                  std::string(to_string(kind)).c_str(), center[0], center[1], center[2], size[0],
                  size[1], size[2], kind == ObstacleKind::cylinder ? axis : -1);
    return buf;
}

// ---------------------------------------------------------------------------

MacGrid::MacGrid(Index3 dims, Vec3 spacing, std::vector<std::uint8_t> fluid)
    : dims_(dims), spacing_(spacing), fluid_(std::move(fluid))
{
    const int ncell = num_cells();
    if (static_cast<int>(fluid_.size()) != ncell)
        throw Error(ErrorCode::inconsistent_inputs, "fluid mask size does not match grid");

    cell_dof_.assign(static_cast<std::size_t>(ncell), -1);
    for (int c = 0; c < ncell; ++c) {
        if (is_fluid(c)) {
            cell_dof_[static_cast<std::size_t>(c)] = static_cast<int>(fluid_cells_.size());
            fluid_cells_.push_back(c);
        }
    }

    for (int a = 0; a < 3; ++a) {
        auto& dof = face_dof_[static_cast<std::size_t>(a)];
        dof.assign(static_cast<std::size_t>(ncell), -1);
        face_offset_[static_cast<std::size_t>(a)] = static_cast<int>(face_axis_.size());
        for (int c = 0; c < ncell; ++c) {
            if (is_fluid(c) && is_fluid(shifted(c, a, -1))) {
                dof[static_cast<std::size_t>(c)] = static_cast<int>(face_axis_.size());
                face_axis_.push_back(a);
                face_cell_.push_back(c);
            }
        }
    }
    face_offset_[3] = static_cast<int>(face_axis_.size());
}

Index3 MacGrid::coords(int cell) const noexcept
{
    const int i = cell % dims_[0];
    const int rest = cell / dims_[0];
    return {i, rest % dims_[1], rest / dims_[1]};
}

int MacGrid::shifted(int cell, int axis, int delta) const noexcept
{
    Index3 ijk = coords(cell);
    const int na = dims_[static_cast<std::size_t>(axis)];
    int& v = ijk[static_cast<std::size_t>(axis)];
    v = ((v + delta) % na + na) % na;
    return linear(ijk[0], ijk[1], ijk[2]);
}

Vec3 MacGrid::cell_center(int cell, const Vec3& origin) const noexcept
{
    const Index3 ijk = coords(cell);
    Vec3 x{};
    for (std::size_t a = 0; a < 3; ++a)
        x[a] = origin[a] + (ijk[a] + 0.5) * spacing_[a];
    return x;
}

Vec3 MacGrid::face_center(int axis, int cell, const Vec3& origin) const noexcept
{
    Vec3 x = cell_center(cell, origin);
    x[static_cast<std::size_t>(axis)] -= 0.5 * spacing_[static_cast<std::size_t>(axis)];
    return x;
}

bool MacGrid::same_layout(const MacGrid& other) const noexcept
{
    return this == &other || (dims_ == other.dims_ && spacing_ == other.spacing_ && fluid_ == other.fluid_);
}

// ---------------------------------------------------------------------------

namespace {

void check_inside_cell(const ObstacleSpec& shape, int n)
{
    const Vec3 half = shape.bounding_half_extents();
    const double margin = 1.0 / n;
    for (std::size_t a = 0; a < 3; ++a) {
        if (!(half[a] >= 0.0))
            throw Error(ErrorCode::precondition, "obstacle size must be non-negative");
        const double lo = shape.center[a] - half[a];
        const double hi = shape.center[a] + half[a];
        if (lo < -0.5 + margin - 1e-12 || hi > 0.5 - margin + 1e-12)
            throw Error(ErrorCode::obstacle_touches_boundary,
                        "obstacle closure must stay one grid spacing inside the unit cell (n=" +
                            std::to_string(n) + ")");
    }
    if (shape.kind == ObstacleKind::cylinder && (shape.axis < 0 || shape.axis > 2))
        throw Error(ErrorCode::precondition, "cylinder axis must be 0, 1 or 2");
}

bool is_integer_ratio(double num, double den, long& ratio)
{
    const double r = num / den;
    ratio = std::lround(r);
    return ratio >= 1 && std::abs(r - static_cast<double>(ratio)) <= 1e-9 * std::max(1.0, r);
}

}  // namespace

CellGeometry build_cell_geometry(const ObstacleSpec& shape, int n)
{
    if (n < 4)
        throw Error(ErrorCode::precondition, "cell resolution n >= 4 required");
    check_inside_cell(shape, n);

    const double hgrid = 1.0 / n;
    std::vector<std::uint8_t> fluid(static_cast<std::size_t>(n) * n * n, 1);
    int solid = 0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Vec3 y{-0.5 + (i + 0.5) * hgrid, -0.5 + (j + 0.5) * hgrid, -0.5 + (k + 0.5) * hgrid};
                if (shape.contains(y)) {
                    fluid[static_cast<std::size_t>(i + n * (j + n * k))] = 0;
                    ++solid;
                }
            }
    if (solid == 0)
        throw Error(ErrorCode::empty_obstacle, "obstacle contains no cell center at n=" + std::to_string(n));
    if (solid == n * n * n)
        throw Error(ErrorCode::empty_fluid, "no fluid cell left in the unit cell");

    CellGeometry geom;
    geom.obstacle = shape;
    geom.n = n;
    geom.spacing = hgrid;
    geom.grid = MacGrid({n, n, n}, {hgrid, hgrid, hgrid}, std::move(fluid));
    geom.porosity = geom.grid.num_fluid_cells() * geom.grid.cell_volume();
    return geom;
}

CellGeometry build_fluid_cell(int n)
{
    if (n < 4)
        throw Error(ErrorCode::precondition, "cell resolution n >= 4 required");
    CellGeometry geom;
    geom.has_obstacle = false;
    geom.obstacle = ObstacleSpec::sphere({0, 0, 0}, 0.0);
    geom.n = n;
    geom.spacing = 1.0 / n;
    geom.grid = MacGrid({n, n, n}, {geom.spacing, geom.spacing, geom.spacing},
                        std::vector<std::uint8_t>(static_cast<std::size_t>(n) * n * n, 1));
    geom.porosity = 1.0;
    return geom;
}

ThinDomainGeometry build_thin_domain(std::array<double, 2> omega_extent, double eps, double h,
                                     const ObstacleSpec& shape, int cells_per_period)
{
    const int m = cells_per_period;
    if (m < 4)
        throw Error(ErrorCode::precondition, "cells_per_period m >= 4 required");
    if (!(eps > 0.0) || !(h > 0.0))
        throw Error(ErrorCode::precondition, "eps and h must be positive");
    if (!(eps < h))
        throw Error(ErrorCode::precondition, "eps < h required (thin porous medium with eps << h)");
    long b0 = 0, b1 = 0;
    if (!is_integer_ratio(omega_extent[0], eps, b0) || !is_integer_ratio(omega_extent[1], eps, b1))
        throw Error(ErrorCode::incompatible_tiling, "omega extents must be integer multiples of eps");
    check_inside_cell(shape, m);

    ThinDomainGeometry g;
    g.eps = eps;
    g.h = h;
    g.omega_extent = omega_extent;
    g.cells_per_period = m;
    g.obstacle = shape;

    const double dx = eps / m;
    const int nx = static_cast<int>(b0) * m;
    const int ny = static_cast<int>(b1) * m;
    const int nz = std::max(1, static_cast<int>(std::lround(h / dx)));
    const double dz = h / nz;
    g.interior = {nx, ny, nz};
    g.spacing = {omega_extent[0] / nx, omega_extent[1] / ny, dz};
    g.blocks = {static_cast<int>(b0), static_cast<int>(b1),
                static_cast<int>(std::ceil(h / eps - 1e-9))};

    const Index3 padded{nx + 1, ny + 1, nz + 1};
    auto padded_index = [&](int i, int j, int k) { return i + padded[0] * (j + padded[1] * k); };
    std::vector<std::uint8_t> fluid(static_cast<std::size_t>(padded[0]) * padded[1] * padded[2], 0);
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                fluid[static_cast<std::size_t>(padded_index(i, j, k))] = 1;

    const Vec3 half = shape.bounding_half_extents();
    const std::array<int, 3> ncell{nx, ny, nz};
    int total_solid = 0;
    std::vector<int> voxels;
    for (int k3 = 0; k3 < g.blocks[2]; ++k3)
        for (int k2 = 0; k2 < g.blocks[1]; ++k2)
            for (int k1 = 0; k1 < g.blocks[0]; ++k1) {
                const Index3 kk{k1, k2, k3};
                // Obstacle extent in physical coordinates.
                std::array<int, 3> lo{}, hi{};
                bool inside = true;
                for (std::size_t a = 0; a < 3; ++a) {
                    const double c = eps * (kk[a] + 0.5 + shape.center[a]);
                    const double top = a == 2 ? h : omega_extent[a];
                    if (c - eps * half[a] < 0.0 || c + eps * half[a] > top)
                        inside = false;
                    const double d = g.spacing[a];
                    lo[a] = std::max(0, static_cast<int>(std::floor((c - eps * half[a]) / d)) - 1);
                    hi[a] = std::min(ncell[a] - 1, static_cast<int>(std::ceil((c + eps * half[a]) / d)) + 1);
                }
                if (!inside)
                    continue;
                voxels.clear();
                bool touches = false;
                for (int k = lo[2]; k <= hi[2]; ++k)
                    for (int j = lo[1]; j <= hi[1]; ++j)
                        for (int i = lo[0]; i <= hi[0]; ++i) {
                            const Vec3 x{(i + 0.5) * g.spacing[0], (j + 0.5) * g.spacing[1],
                                         (k + 0.5) * g.spacing[2]};
                            const Vec3 y{x[0] / eps - k1 - 0.5, x[1] / eps - k2 - 0.5, x[2] / eps - k3 - 0.5};
                            if (!shape.contains(y))
                                continue;
                            if (i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1)
                                touches = true;
                            voxels.push_back(padded_index(i, j, k));
                        }
                if (touches)
                    continue;
                if (voxels.empty())
                    throw Error(ErrorCode::resolution_too_coarse,
                                "obstacle copy occupies no grid cell at m=" + std::to_string(m));
                for (int v : voxels)
                    fluid[static_cast<std::size_t>(v)] = 0;
                total_solid += static_cast<int>(voxels.size());
                g.obstacle_copies.push_back(kk);
            }
    if (total_solid == 0)
        throw Error(ErrorCode::resolution_too_coarse, "no obstacle could be stamped into the slab");

    g.grid = MacGrid(padded, g.spacing, std::move(fluid));
    return g;
}

// ---------------------------------------------------------------------------

void write_mask_vtk(const std::string& path, const CellGeometry& geom)
{
    VtkCellArray mask{"fluid", 1, {}};
    mask.values.reserve(static_cast<std::size_t>(geom.grid.num_cells()));
    for (int c = 0; c < geom.grid.num_cells(); ++c)
        mask.values.push_back(geom.grid.is_fluid(c) ? 1.0 : 0.0);
    write_vtk_structured_points(path, "unit cell fluid mask", {geom.n, geom.n, geom.n}, CellGeometry::origin,
                                {geom.spacing, geom.spacing, geom.spacing}, {mask});
}

void write_mask_vtk(const std::string& path, const ThinDomainGeometry& geom)
{
    VtkCellArray mask{"fluid", 1, {}};
    mask.values.reserve(static_cast<std::size_t>(geom.num_interior_cells()));
    for (int k = 0; k < geom.interior[2]; ++k)
        for (int j = 0; j < geom.interior[1]; ++j)
            for (int i = 0; i < geom.interior[0]; ++i)
                mask.values.push_back(geom.interior_fluid(i, j, k) ? 1.0 : 0.0);
    write_vtk_structured_points(path, "thin domain fluid mask", geom.interior, ThinDomainGeometry::origin,
                                geom.spacing, {mask});
}

}  // namespace mpdarcy
