#include "mpdarcy/cell.hpp"

#include "mpdarcy/error.hpp"
#include "mpdarcy/io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>

namespace mpdarcy {

namespace {

std::string format_g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double weighted_norm(const MacGrid& grid, const Vector& v)
{
    return std::sqrt(grid.cell_volume() * v.squaredNorm());
}

void check_index(int i, int k)
{
    if (i < 1 || i > 3 || k < 1 || k > 2)
        throw Error(ErrorCode::precondition,
                    "cell problem index (i, k) must lie in {1,2,3} x {1,2}, got (" + std::to_string(i) + ", " +
                        std::to_string(k) + ")");
}

}  // namespace

std::pair<Vector, Vector> cell_forcing(const MacGrid& grid, int i, int k)
{
    check_index(i, k);
    const int nf = grid.num_active_faces();
    Vector e = i == 3 ? Vector::Zero(nf) : unit_component(grid, i - 1);
    Vector zero = Vector::Zero(nf);
    if (k == 1)
        return {std::move(e), std::move(zero)};
    return {std::move(zero), std::move(e)};
}

MicropolarCellSolution solve_cell_problem(const MicropolarSystem& system, const CellGeometry& geom, int i, int k,
                                          const SolverOptions& options)
{
    if (!system.grid().same_layout(geom.grid))
        throw Error(ErrorCode::geometry_mismatch, "system was assembled on a different cell geometry");
    const auto [fu, fw] = cell_forcing(geom.grid, i, k);
    SaddleSolution s = solve(system, fu, fw, options);

    MicropolarCellSolution out;
    out.i = i;
    out.k = k;
    out.geometry = &geom;
    out.params = system.params();
    out.tol = options.tol;
    out.u = {&geom.grid, std::move(s.u)};
    out.w = {&geom.grid, std::move(s.w)};
    out.pi = {&geom.grid, std::move(s.pi), true};
    out.stats = s.stats;
    return out;
}

MicropolarCellSolution solve_cell_problem(const CellGeometry& geom, const PhysicalParams& params, int i, int k,
                                          const SolverOptions& options)
{
    check_index(i, k);
    const MicropolarSystem system = MicropolarSystem::assemble(geom, params, options.preconditioner);
    return solve_cell_problem(system, geom, i, k, options);
}

std::vector<MicropolarCellSolution> solve_all_cell_problems(const CellGeometry& geom, const PhysicalParams& params,
                                                            const SolverOptions& options)
{
    const MicropolarSystem system = MicropolarSystem::assemble(geom, params, options.preconditioner);
    std::vector<std::future<MicropolarCellSolution>> jobs;
    for (int i = 1; i <= 3; ++i)
        for (int k = 1; k <= 2; ++k)
            jobs.push_back(std::async(std::launch::async, [&system, &geom, &options, i, k] {
                return solve_cell_problem(system, geom, i, k, options);
            }));
    std::vector<MicropolarCellSolution> out;
    out.reserve(jobs.size());
    for (auto& job : jobs)
        out.push_back(job.get());
    for (const auto& s : out)
        if (!s.stats.converged)
            throw Error(ErrorCode::no_convergence,
                        "cell problem (" + std::to_string(s.i) + ", " + std::to_string(s.k) +
                            ") did not converge: relative residual " + format_g17(s.stats.relative_residual) +
                            " after " + std::to_string(s.stats.iterations) + " iterations");
    return out;
}

std::string geometry_fingerprint(const ObstacleSpec& obstacle, int n)
{
    return hex64(fnv1a64(obstacle.canonical() + "|n=" + std::to_string(n)));
}

std::string permeability_fingerprint(const ObstacleSpec& obstacle, int n, const PhysicalParams& params)
{
    return hex64(fnv1a64(obstacle.canonical() + "|n=" + std::to_string(n) + "|N2=" + format_g17(params.N2) +
                         "|Rc=" + format_g17(params.Rc)));
}

std::string PermeabilitySet::geometry_fingerprint() const
{
    return mpdarcy::geometry_fingerprint(obstacle, n);
}

std::string PermeabilitySet::fingerprint() const
{
    return permeability_fingerprint(obstacle, n, params);
}

PermeabilitySet compute_permeabilities(const std::vector<MicropolarCellSolution>& solutions)
{
    if (solutions.size() != 6)
        throw Error(ErrorCode::inconsistent_inputs,
                    "expected 6 cell solutions, got " + std::to_string(solutions.size()));
    const MicropolarCellSolution* table[3][2] = {};
    const CellGeometry* geom = solutions.front().geometry;
    const PhysicalParams params = solutions.front().params;
    for (const auto& s : solutions) {
        if (s.geometry == nullptr || geom == nullptr || !s.geometry->grid.same_layout(geom->grid) ||
            !(s.geometry->obstacle == geom->obstacle))
            throw Error(ErrorCode::inconsistent_inputs, "cell solutions belong to different geometries");
        if (!(s.params == params))
            throw Error(ErrorCode::inconsistent_inputs, "cell solutions use different physical parameters");
        check_index(s.i, s.k);
        if (table[s.i - 1][s.k - 1] != nullptr)
            throw Error(ErrorCode::inconsistent_inputs,
                        "duplicate cell solution (" + std::to_string(s.i) + ", " + std::to_string(s.k) + ")");
        if (!s.stats.converged)
            throw Error(ErrorCode::inconsistent_inputs,
                        "cell solution (" + std::to_string(s.i) + ", " + std::to_string(s.k) + ") is not converged");
        table[s.i - 1][s.k - 1] = &s;
    }

    PermeabilitySet p;
    p.params = params;
    p.obstacle = geom->obstacle;
    p.has_obstacle = geom->has_obstacle;
    p.n = geom->n;
    p.tol = solutions.front().tol;
    const MacGrid& grid = geom->grid;

    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) {
            p.K1(i, j) = integrate_component(grid, table[j][0]->u.values, i);
            p.K2(i, j) = integrate_component(grid, table[j][1]->u.values, i);
            p.L1(i, j) = integrate_component(grid, table[j][0]->w.values, i);
            p.L2(i, j) = integrate_component(grid, table[j][1]->w.values, i);
        }

    auto& r = p.residuals;
    const double k1n = p.K1.norm();
    const double l2n = p.L2.norm();
    r.k1_symmetry = k1n > 0.0 ? (p.K1 - p.K1.transpose()).norm() / k1n : 0.0;
    r.l2_symmetry = l2n > 0.0 ? (p.L2 - p.L2.transpose()).norm() / l2n : 0.0;
    r.k2_symmetry = k1n > 0.0 ? (p.K2 - p.K2.transpose()).norm() / k1n : 0.0;
    r.k2_l1_transpose = k1n > 0.0 ? (p.K2 - p.L1.transpose()).norm() / k1n : 0.0;
    const Eigen::Matrix2d k1s = 0.5 * (p.K1 + p.K1.transpose());
    r.k1_min_eigenvalue = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(k1s).eigenvalues().minCoeff();
    for (int k = 0; k < 2; ++k) {
        const auto* s = table[2][k];
        r.trivial_norm = std::max(r.trivial_norm, weighted_norm(grid, s->u.values) + weighted_norm(grid, s->w.values));
    }
    for (const auto& s : solutions)
        r.max_divergence = std::max(r.max_divergence, s.stats.divergence_residual);

    if (!(r.k1_symmetry <= 1e-8))
        throw Error(ErrorCode::invariant_violation,
                    "K1 is not symmetric: relative residual " + format_g17(r.k1_symmetry));
    if (!(r.l2_symmetry <= 1e-8))
        throw Error(ErrorCode::invariant_violation,
                    "L2 is not symmetric: relative residual " + format_g17(r.l2_symmetry));
    if (!(r.k1_min_eigenvalue > 0.0))
        throw Error(ErrorCode::invariant_violation,
                    "K1 is not positive definite: smallest eigenvalue " + format_g17(r.k1_min_eigenvalue));
    if (!(r.trivial_norm <= 10.0 * p.tol))
        throw Error(ErrorCode::invariant_violation,
                    "i = 3 cell solutions are not zero: norm " + format_g17(r.trivial_norm));
    return p;
}

PermeabilitySet compute_permeabilities(const CellGeometry& geom, const PhysicalParams& params,
                                       const SolverOptions& options)
{
    return compute_permeabilities(solve_all_cell_problems(geom, params, options));
}

}  // namespace mpdarcy
