#include "mpdarcy/saddle_solver.hpp"

#include "mpdarcy/error.hpp"
#include "mpdarcy/minres.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

namespace mpdarcy {

void PhysicalParams::validate() const
{
    if (!(N2 >= 0.0 && N2 < 1.0))
        throw Error(ErrorCode::precondition, "0 < N2 < 1 required (got N2=" + std::to_string(N2) + ")");
    if (!(Rc > 0.0))
        throw Error(ErrorCode::precondition, "Rc > 0 required (got Rc=" + std::to_string(Rc) + ")");
}

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;
using IcFactor = Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>>;

void append_block(std::vector<Eigen::Triplet<double>>& t, const SparseMatrix& m, int row0, int col0,
                  double scale)
{
    for (int r = 0; r < m.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m, r); it; ++it)
            t.emplace_back(row0 + static_cast<int>(it.row()), col0 + static_cast<int>(it.col()),
                           scale * it.value());
}

SparseMatrix identity(int n)
{
    SparseMatrix m(n, n);
    m.setIdentity();
    return m;
}

void remove_mean(Eigen::Ref<Vector> v)
{
    if (v.size() > 0)
        v.array() -= v.mean();
}

}  // namespace

struct MicropolarSystem::Factor {
    std::optional<IcFactor> coupled;
    std::optional<IcFactor> velocity;
    std::optional<IcFactor> rotation;
    Vector inverse_diagonal;
};

MicropolarSystem MicropolarSystem::assemble(const MacGrid& grid, BoundaryClosure closure,
                                            const PhysicalParams& params, PreconditionerKind preconditioner)
{
    params.validate();
    if (closure == BoundaryClosure::periodic && grid.num_solid_cells() == 0)
        throw Error(ErrorCode::singular_problem,
                    "periodic problem without obstacle: constants lie in the kernel of the Laplacian");
    if (grid.num_active_faces() == 0)
        throw Error(ErrorCode::singular_problem, "no active faces");
    for (int dof = 0; dof < grid.num_fluid_cells(); ++dof) {
        const int cell = grid.dof_cell(dof);
        bool connected = false;
        for (int a = 0; a < 3 && !connected; ++a)
            connected = grid.face_active(a, cell) || grid.face_active(a, grid.shifted(cell, a, 1));
        if (!connected)
            throw Error(ErrorCode::singular_problem, "isolated fluid cell adds a pressure null mode");
    }

    MicropolarSystem sys;
    sys.ops_ = std::make_shared<const DiscreteOperatorSet>(build_operators(grid, closure));
    sys.params_ = params;
    sys.kind_ = preconditioner;
    const auto& ops = *sys.ops_;
    sys.nu_ = ops.num_faces();
    sys.np_ = ops.num_cells();
    const int nu = sys.nu_;
    const double c2 = 2.0 * params.N2;

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(ops.A.nonZeros() * 2 + ops.R.nonZeros() * 2 + ops.G.nonZeros() * 2 + nu));
    append_block(t, ops.A, 0, 0, 1.0);
    append_block(t, ops.Rt, 0, nu, -c2);
    append_block(t, ops.G, 0, 2 * nu, 1.0);
    append_block(t, ops.R, nu, 0, -c2);
    append_block(t, ops.A, nu, nu, params.Rc);
    append_block(t, identity(nu), nu, nu, 4.0 * params.N2);
    append_block(t, ops.D, 2 * nu, 0, -1.0);
    sys.matrix_ = SparseMatrix(sys.dimension(), sys.dimension());
    sys.matrix_.setFromTriplets(t.begin(), t.end());
    sys.matrix_.makeCompressed();

    auto factor = std::make_shared<Factor>();
    switch (preconditioner) {
    case PreconditionerKind::coupled_ic: {
        ColMatrix block = sys.matrix_.topLeftCorner(2 * nu, 2 * nu);
        factor->coupled.emplace();
        factor->coupled->compute(block);
        if (factor->coupled->info() != Eigen::Success)
            throw Error(ErrorCode::no_convergence, "incomplete Cholesky of the (u, w) block failed");
        break;
    }
    case PreconditionerKind::block_ic: {
        ColMatrix a = ops.A;
        ColMatrix c = ColMatrix(params.Rc * ops.A) + ColMatrix(4.0 * params.N2 * identity(nu));
        factor->velocity.emplace();
        factor->velocity->compute(a);
        factor->rotation.emplace();
        factor->rotation->compute(c);
        if (factor->velocity->info() != Eigen::Success || factor->rotation->info() != Eigen::Success)
            throw Error(ErrorCode::no_convergence, "incomplete Cholesky of a diagonal block failed");
        break;
    }
    case PreconditionerKind::block_jacobi:
        factor->inverse_diagonal = sys.matrix_.diagonal().head(2 * nu).cwiseInverse();
        break;
    }
    sys.factor_ = std::move(factor);
    return sys;
}

MicropolarSystem MicropolarSystem::assemble(const CellGeometry& geom, const PhysicalParams& params,
                                            PreconditionerKind preconditioner)
{
    return assemble(geom.grid, BoundaryClosure::periodic, params, preconditioner);
}

MicropolarSystem MicropolarSystem::assemble(const ThinDomainGeometry& geom, const PhysicalParams& params,
                                            PreconditionerKind preconditioner)
{
    return assemble(geom.grid, BoundaryClosure::dirichlet_box, params, preconditioner);
}

SparseMatrix MicropolarSystem::coupling_block() const
{
    return SparseMatrix(-2.0 * params_.N2 * ops_->R);
}

SparseMatrix MicropolarSystem::microrotation_block() const
{
    return SparseMatrix(params_.Rc * ops_->A + 4.0 * params_.N2 * identity(nu_));
}

void MicropolarSystem::apply_preconditioner(const Vector& in, Vector& out) const
{
    out.resize(in.size());
    const int nu = nu_;
    switch (kind_) {
    case PreconditionerKind::coupled_ic:
        out.head(2 * nu) = factor_->coupled->solve(in.head(2 * nu));
        break;
    case PreconditionerKind::block_ic:
        out.head(nu) = factor_->velocity->solve(in.head(nu));
        out.segment(nu, nu) = factor_->rotation->solve(in.segment(nu, nu));
        break;
    case PreconditionerKind::block_jacobi:
        out.head(2 * nu) = factor_->inverse_diagonal.cwiseProduct(in.head(2 * nu));
        break;
    }
    out.tail(np_) = in.tail(np_);
    remove_mean(out.tail(np_));
}

SaddleSolution solve(const MicropolarSystem& system, const Vector& rhs_u, const Vector& rhs_w,
                     const SolverOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    const int nu = system.num_u();
    const int np = system.num_p();
    const int n = system.dimension();
    if (rhs_u.size() != nu || rhs_w.size() != nu)
        throw Error(ErrorCode::inconsistent_inputs, "right-hand side sizes do not match the active faces");
    if (!(options.tol > 0.0 && options.tol <= 1e-4))
        throw Error(ErrorCode::precondition, "solver tolerance must lie in (0, 1e-4]");

    Vector b = Vector::Zero(n);
    b.head(nu) = rhs_u;
    b.segment(nu, nu) = rhs_w;
    const double bnorm = b.norm();

    SaddleSolution sol;
    Vector x = Vector::Zero(n);
    const int max_iter = options.max_iter > 0
                             ? options.max_iter
                             : std::max(1, static_cast<int>(std::ceil(20.0 * std::sqrt(static_cast<double>(n)))));

    const SparseMatrix& K = system.matrix();
    auto apply = [&](const Vector& in, Vector& out) {
        out.noalias() = K * in;
        remove_mean(out.tail(np));
    };
    auto precondition = [&](const Vector& in, Vector& out) { system.apply_preconditioner(in, out); };

    double rel = 0.0;
    int total = 0;
    bool converged = bnorm == 0.0;
    if (!converged) {
        double inner_tol = options.tol;
        Vector r(n);
        while (total < max_iter) {
            const KrylovResult kr = minres(apply, precondition, b, x, inner_tol, max_iter - total);
            total += kr.iterations;
            apply(x, r);
            r = b - r;
            rel = r.norm() / bnorm;
            if (rel <= options.tol) {
                converged = true;
                break;
            }
            if (kr.iterations == 0)
                break;
            // Restart from the current iterate; the preconditioned and the
            // Euclidean residual norms disagree by a problem-dependent factor.
            inner_tol = std::max(1e-15, 0.5 * options.tol * bnorm / r.norm());
            inner_tol = std::min(inner_tol, 0.5);
        }
    }

    sol.u = x.head(nu);
    sol.w = x.segment(nu, nu);
    sol.pi = x.tail(np);
    remove_mean(sol.pi);
    sol.stats.iterations = total;
    sol.stats.relative_residual = rel;
    sol.stats.divergence_residual = bnorm == 0.0 ? 0.0 : (system.ops().D * sol.u).norm() / bnorm;
    sol.stats.converged = converged;
    sol.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

BlockResiduals block_residuals(const MicropolarSystem& system, const Vector& rhs_u, const Vector& rhs_w,
                               const SaddleSolution& sol)
{
    const auto& ops = system.ops();
    const auto& prm = system.params();
    const double bnorm = std::sqrt(rhs_u.squaredNorm() + rhs_w.squaredNorm());
    const double scale = bnorm > 0.0 ? bnorm : 1.0;
    BlockResiduals r;
    const Vector mom = rhs_u - (ops.A * sol.u - 2.0 * prm.N2 * (ops.Rt * sol.w) + ops.G * sol.pi);
    const Vector rot = rhs_w - (prm.Rc * (ops.A * sol.w) + 4.0 * prm.N2 * sol.w - 2.0 * prm.N2 * (ops.R * sol.u));
    r.momentum = mom.norm() / scale;
    r.microrotation = rot.norm() / scale;
    r.divergence = (ops.D * sol.u).norm() / scale;
    return r;
}

double energy_identity_residual(const MicropolarSystem& system, const Vector& rhs_u, const Vector& rhs_w,
                                const SaddleSolution& sol)
{
    const auto& ops = system.ops();
    const auto& prm = system.params();
    const double lhs = ops.inner(rhs_u, sol.u) + ops.inner(rhs_w, sol.w);
    const double rhs = ops.inner(ops.A * sol.u, sol.u) + prm.Rc * ops.inner(ops.A * sol.w, sol.w) +
                       4.0 * prm.N2 * ops.inner(sol.w, sol.w) - 4.0 * prm.N2 * ops.inner(ops.R * sol.u, sol.w);
    const double scale = std::max(std::abs(lhs), std::numeric_limits<double>::min());
    return std::abs(lhs - rhs) / scale;
}

}  // namespace mpdarcy
