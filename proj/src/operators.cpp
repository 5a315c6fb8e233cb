#include "mpdarcy/operators.hpp"

#include "mpdarcy/error.hpp"

#include <vector>

namespace mpdarcy {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& t)
{
    SparseMatrix m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

// Cyclic partner axes: rot_c = d_a phi_b - d_b phi_a.
constexpr int axis_a(int c) { return (c + 1) % 3; }
constexpr int axis_b(int c) { return (c + 2) % 3; }

// Appends the four curl terms of edge (c, cell) scaled by `weight`.
template <class Emit>
void curl_terms(const MacGrid& grid, int c, int cell, double weight, Emit&& emit)
{
    const int a = axis_a(c);
    const int b = axis_b(c);
    const double ha = grid.spacing()[static_cast<std::size_t>(a)];
    const double hb = grid.spacing()[static_cast<std::size_t>(b)];
    auto add = [&](int axis, int at, double v) {
        const int dof = grid.face_dof(axis, at);
        if (dof >= 0)
            emit(dof, weight * v);
    };
    add(b, cell, 1.0 / ha);
    add(b, grid.shifted(cell, a, -1), -1.0 / ha);
    add(a, cell, -1.0 / hb);
    add(a, grid.shifted(cell, b, -1), 1.0 / hb);
}

}  // namespace

SparseMatrix build_edge_curl(const MacGrid& grid)
{
    const int ncell = grid.num_cells();
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(12) * ncell);
    for (int c = 0; c < 3; ++c)
        for (int cell = 0; cell < ncell; ++cell)
            curl_terms(grid, c, cell, 1.0, [&](int dof, double v) { t.emplace_back(c * ncell + cell, dof, v); });
    return from_triplets(3 * ncell, grid.num_active_faces(), t);
}

DiscreteOperatorSet build_operators(const MacGrid& grid, BoundaryClosure closure)
{
    DiscreteOperatorSet ops;
    ops.grid = &grid;
    ops.closure = closure;
    ops.volume = grid.cell_volume();

    const int nf = grid.num_active_faces();
    const int nc = grid.num_fluid_cells();
    const auto& h = grid.spacing();

    std::vector<Triplet> tg;
    tg.reserve(static_cast<std::size_t>(2) * nf);
    std::vector<Triplet> ta;
    ta.reserve(static_cast<std::size_t>(7) * nf);
    std::vector<Triplet> tr;
    tr.reserve(static_cast<std::size_t>(32) * nf);

    for (int dof = 0; dof < nf; ++dof) {
        const int a = grid.dof_face_axis(dof);
        const int cell = grid.dof_face_cell(dof);
        const double ha = h[static_cast<std::size_t>(a)];

        tg.emplace_back(dof, grid.cell_dof(cell), 1.0 / ha);
        tg.emplace_back(dof, grid.cell_dof(grid.shifted(cell, a, -1)), -1.0 / ha);

        double diag = 0.0;
        for (int b = 0; b < 3; ++b) {
            const double w = 1.0 / (h[static_cast<std::size_t>(b)] * h[static_cast<std::size_t>(b)]);
            diag += 2.0 * w;
            for (int s : {-1, 1}) {
                const int nb = grid.face_dof(a, grid.shifted(cell, b, s));
                if (nb >= 0)
                    ta.emplace_back(dof, nb, -w);
            }
        }
        ta.emplace_back(dof, dof, diag);

        // rot component a on this face: average of the eight surrounding
        // edge-a curls, edges at cell + da*e_p + db*e_q - dc*e_a.
        const int p = axis_a(a);
        const int q = axis_b(a);
        for (int dc = 0; dc < 2; ++dc) {
            const int c0 = grid.shifted(cell, a, -dc);
            for (int dp = 0; dp < 2; ++dp) {
                const int c1 = grid.shifted(c0, p, dp);
                for (int dq = 0; dq < 2; ++dq) {
                    const int edge = grid.shifted(c1, q, dq);
                    curl_terms(grid, a, edge, 0.125, [&](int col, double v) { tr.emplace_back(dof, col, v); });
                }
            }
        }
    }

    ops.G = from_triplets(nf, nc, tg);
    ops.D = SparseMatrix(-SparseMatrix(ops.G.transpose()));
    ops.D.makeCompressed();
    ops.A = from_triplets(nf, nf, ta);
    ops.R = from_triplets(nf, nf, tr);
    ops.R.prune(0.0);
    ops.Rt = SparseMatrix(ops.R.transpose());
    ops.Rt.makeCompressed();
    return ops;
}

DiscreteOperatorSet build_operators(const CellGeometry& geom)
{
    return build_operators(geom.grid, BoundaryClosure::periodic);
}

DiscreteOperatorSet build_operators(const ThinDomainGeometry& geom)
{
    return build_operators(geom.grid, BoundaryClosure::dirichlet_box);
}

Vector sample_faces(const MacGrid& grid, const Vec3& origin, const std::function<Vec3(const Vec3&)>& f)
{
    Vector v(grid.num_active_faces());
    for (int dof = 0; dof < grid.num_active_faces(); ++dof) {
        const int a = grid.dof_face_axis(dof);
        v[dof] = f(grid.face_center(a, grid.dof_face_cell(dof), origin))[static_cast<std::size_t>(a)];
    }
    return v;
}

Vector sample_cells(const MacGrid& grid, const Vec3& origin, const std::function<double(const Vec3&)>& f)
{
    Vector v(grid.num_fluid_cells());
    for (int dof = 0; dof < grid.num_fluid_cells(); ++dof)
        v[dof] = f(grid.cell_center(grid.dof_cell(dof), origin));
    return v;
}

Vector unit_component(const MacGrid& grid, int axis)
{
    Vector v = Vector::Zero(grid.num_active_faces());
    v.segment(grid.face_offset(axis), grid.num_active_faces(axis)).setOnes();
    return v;
}

double rot_energy_pairing(const DiscreteOperatorSet& ops, const StaggeredVectorField& a,
                          const StaggeredVectorField& b)
{
    if (a.grid == nullptr || b.grid == nullptr || !a.grid->same_layout(*b.grid) ||
        !a.grid->same_layout(*ops.grid))
        throw Error(ErrorCode::geometry_mismatch, "rot pairing of fields on different geometries");
    return ops.inner(ops.R * a.values, b.values);
}

double integrate_component(const MacGrid& grid, const Vector& face_values, int axis)
{
    double sum = 0.0;
    for (int dof = 0; dof < grid.num_fluid_cells(); ++dof) {
        const int cell = grid.dof_cell(dof);
        const int lo = grid.face_dof(axis, cell);
        const int hi = grid.face_dof(axis, grid.shifted(cell, axis, 1));
        const double vlo = lo < 0 ? 0.0 : face_values[lo];
        const double vhi = hi < 0 ? 0.0 : face_values[hi];
        sum += 0.5 * (vlo + vhi);
    }
    return sum * grid.cell_volume();
}

}  // namespace mpdarcy
