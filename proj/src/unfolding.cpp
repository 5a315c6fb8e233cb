#include "mpdarcy/unfolding.hpp"

#include "mpdarcy/error.hpp"

#include <cmath>
#include <cstring>

namespace mpdarcy {

namespace {

int checked_floor(double s)
{
    const double r = std::round(s);
    if (std::abs(s - r) <= 1e-12 * std::max(1.0, std::abs(s)))
        throw Error(ErrorCode::on_cell_boundary, "point lies on a lattice block boundary");
    return static_cast<int>(std::floor(s));
}

void check_tiling(const ThinDomainGeometry& geom)
{
    const int m = geom.cells_per_period;
    const double dx = geom.eps / m;
    for (std::size_t a = 0; a < 3; ++a)
        if (std::abs(geom.spacing[a] - dx) > 1e-12 * dx)
            throw Error(ErrorCode::incompatible_tiling,
                        "unfolding needs spacing eps/m on every axis (h/eps * m must be an integer)");
    if (geom.interior[0] != geom.blocks[0] * m || geom.interior[1] != geom.blocks[1] * m ||
        geom.interior[2] > geom.blocks[2] * m)
        throw Error(ErrorCode::incompatible_tiling, "slab is not tiled by eps-blocks");
}

void check_size(const ThinDomainGeometry& geom, const std::vector<double>& v)
{
    if (v.size() != static_cast<std::size_t>(geom.num_interior_cells()))
        throw Error(ErrorCode::inconsistent_inputs, "slab field size does not match the geometry");
}

template <class Visit>
void for_each_pair(const ThinDomainGeometry& geom, Visit&& visit)
{
    const int m = geom.cells_per_period;
    const auto& n = geom.interior;
    for (int k = 0; k < geom.blocks[2] * m; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i)
                visit(i, j, k);
}

}  // namespace

Index3 kappa(const Vec3& z, double eps, double h)
{
    if (!(eps > 0.0 && h > 0.0))
        throw Error(ErrorCode::precondition, "kappa needs eps > 0 and h > 0");
    return {checked_floor(z[0] / eps), checked_floor(z[1] / eps), checked_floor(h * z[2] / eps)};
}

UnfoldedField unfold(const ThinDomainGeometry& geom, const std::vector<double>& slab_values)
{
    check_tiling(geom);
    check_size(geom, slab_values);
    const int m = geom.cells_per_period;
    UnfoldedField u;
    u.eps = geom.eps;
    u.h = geom.h;
    u.m = m;
    u.blocks = geom.blocks;
    const std::size_t m3 = static_cast<std::size_t>(m) * m * m;
    u.values.assign(static_cast<std::size_t>(u.num_blocks()) * m3, 0.0);
    const auto& n = geom.interior;
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                const int b = u.block_linear(i / m, j / m, k / m);
                const int l = u.local_linear(i % m, j % m, k % m);
                u.values[static_cast<std::size_t>(b) * m3 + static_cast<std::size_t>(l)] =
                    slab_values[static_cast<std::size_t>(geom.interior_linear(i, j, k))];
            }
    return u;
}

std::vector<double> fold(const ThinDomainGeometry& geom, const UnfoldedField& field)
{
    check_tiling(geom);
    const int m = geom.cells_per_period;
    if (field.m != m || field.blocks != geom.blocks)
        throw Error(ErrorCode::geometry_mismatch, "unfolded field was built on a different slab");
    std::vector<double> v(static_cast<std::size_t>(geom.num_interior_cells()));
    const auto& n = geom.interior;
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i)
                v[static_cast<std::size_t>(geom.interior_linear(i, j, k))] =
                    field.at(field.block_linear(i / m, j / m, k / m), field.local_linear(i % m, j % m, k % m));
    return v;
}

std::vector<double> slab_cell_values(const ThinDomainGeometry& geom, const Eigen::VectorXd& face_values, int axis)
{
    const MacGrid& grid = geom.grid;
    if (face_values.size() != grid.num_active_faces())
        throw Error(ErrorCode::inconsistent_inputs, "face field size does not match the slab");
    std::vector<double> v(static_cast<std::size_t>(geom.num_interior_cells()), 0.0);
    const auto& n = geom.interior;
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                const int cell = geom.padded_cell(i, j, k);
                const int lo = grid.face_dof(axis, cell);
                const int hi = grid.face_dof(axis, grid.shifted(cell, axis, 1));
                v[static_cast<std::size_t>(geom.interior_linear(i, j, k))] =
                    0.5 * ((lo < 0 ? 0.0 : face_values[lo]) + (hi < 0 ? 0.0 : face_values[hi]));
            }
    return v;
}

double slab_norm(const ThinDomainGeometry& geom, const std::vector<double>& slab_values)
{
    check_size(geom, slab_values);
    double s = 0.0;
    for (double x : slab_values)
        s += x * x;
    const double weight = geom.spacing[0] * geom.spacing[1] * geom.spacing[2] / geom.h;
    return std::sqrt(weight * s);
}

double unfolded_norm(const UnfoldedField& field)
{
    double s = 0.0;
    for (double x : field.values)
        s += x * x;
    const double weight = field.eps * field.eps * field.eps / field.h / (static_cast<double>(field.m) * field.m * field.m);
    return std::sqrt(weight * s);
}

double slab_derivative_norm(const ThinDomainGeometry& geom, const std::vector<double>& slab_values, int axis)
{
    check_tiling(geom);
    check_size(geom, slab_values);
    const int m = geom.cells_per_period;
    const auto& n = geom.interior;
    // Dilated spacing: horizontal dx, vertical dz / h.
    const double d = axis == 2 ? geom.spacing[2] / geom.h : geom.spacing[static_cast<std::size_t>(axis)];
    auto value = [&](int i, int j, int k) {
        return k < n[2] ? slab_values[static_cast<std::size_t>(geom.interior_linear(i, j, k))] : 0.0;
    };
    double s = 0.0;
    for_each_pair(geom, [&](int i, int j, int k) {
        int idx[3] = {i, j, k};
        if (idx[axis] % m == m - 1)
            return;
        int nb[3] = {i, j, k};
        ++nb[axis];
        const double diff = (value(nb[0], nb[1], nb[2]) - value(i, j, k)) / d;
        s += diff * diff;
    });
    const double weight = geom.spacing[0] * geom.spacing[1] * geom.spacing[2] / geom.h;
    return std::sqrt(weight * s);
}

double unfolded_derivative_norm(const UnfoldedField& field, int axis)
{
    const int m = field.m;
    const double d = 1.0 / m;
    double s = 0.0;
    for (int b = 0; b < field.num_blocks(); ++b)
        for (int l2 = 0; l2 < m; ++l2)
            for (int l1 = 0; l1 < m; ++l1)
                for (int l0 = 0; l0 < m; ++l0) {
                    int l[3] = {l0, l1, l2};
                    if (l[axis] == m - 1)
                        continue;
                    ++l[axis];
                    const double diff =
                        (field.at(b, field.local_linear(l[0], l[1], l[2])) - field.at(b, field.local_linear(l0, l1, l2))) / d;
                    s += diff * diff;
                }
    const double weight = field.eps * field.eps * field.eps / field.h / (static_cast<double>(m) * m * m);
    return std::sqrt(weight * s);
}

UnfoldingCheck check_unfolding_identities(const ThinDomainGeometry& geom, const std::vector<double>& slab_values)
{
    auto rel = [](double a, double b) {
        const double s = std::max(std::abs(a), std::abs(b));
        return s > 0.0 ? std::abs(a - b) / s : 0.0;
    };
    const UnfoldedField u = unfold(geom, slab_values);
    UnfoldingCheck c;
    c.norm_identity = rel(unfolded_norm(u), slab_norm(geom, slab_values));
    const double gy = std::hypot(unfolded_derivative_norm(u, 0), unfolded_derivative_norm(u, 1));
    const double gz = std::hypot(slab_derivative_norm(geom, slab_values, 0), slab_derivative_norm(geom, slab_values, 1));
    c.horizontal_identity = rel(gy, geom.eps * gz);
    c.vertical_identity = rel(unfolded_derivative_norm(u, 2), geom.eps / geom.h * slab_derivative_norm(geom, slab_values, 2));
    const std::vector<double> back = fold(geom, u);
    c.fold_roundtrip = back.size() == slab_values.size() &&
                       std::memcmp(back.data(), slab_values.data(), back.size() * sizeof(double)) == 0;
    return c;
}

}  // namespace mpdarcy
