#pragma once

/**
 * @file saddle_solver.hpp
 * @brief Symmetric block system of the linearized micropolar Stokes problem.
 *
 * Unknowns (u, w, p) on one MacGrid. With the operators of operators.hpp,
 *
 *   [ A          -2 N2 R^T    G ] [u]   [f]
 *   [ -2 N2 R     Rc A + 4N2  0 ] [w] = [g]
 *   [ G^T         0           0 ] [p]   [0]
 *
 * which is  -lap u + grad p = 2N2 rot w + f,  div u = 0,
 *           -Rc lap w + 4N2 w = 2N2 rot u + g,  with the u/w coupling
 * discretized once (R) and its transpose.
 */

#include "mpdarcy/operators.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <memory>

namespace mpdarcy {

struct PhysicalParams {
    double N2 = 0.5;  ///< coupling number, 0 <= N2 < 1 (0 only as decoupled limit)
    double Rc = 1.0;  ///< microrotation viscosity coefficient

    /// Throws PreconditionViolated unless 0 <= N2 < 1 and Rc > 0.
    void validate() const;
    bool operator==(const PhysicalParams&) const = default;
};

enum class PreconditionerKind {
    coupled_ic,    ///< incomplete Cholesky of the whole (u, w) block
    block_ic,      ///< separate incomplete Cholesky of A and of Rc A + 4N2 I
    block_jacobi,  ///< diagonal of the (u, w) block
};

struct SolverOptions {
    double tol = 1e-10;
    int max_iter = 0;  ///< 0 selects 20 * sqrt(system dimension)
    PreconditionerKind preconditioner = PreconditionerKind::block_jacobi;
};

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;  ///< |b - K x| / |b|, Euclidean
    double divergence_residual = 0.0;  ///< |D u| / |b|
    double wall_seconds = 0.0;
    bool converged = false;
};

class MicropolarSystem {
public:
    /// Throws SingularProblem for a periodic grid without any solid cell.
    static MicropolarSystem assemble(const MacGrid& grid, BoundaryClosure closure, const PhysicalParams& params,
                                     PreconditionerKind preconditioner = PreconditionerKind::block_jacobi);
    static MicropolarSystem assemble(const CellGeometry& geom, const PhysicalParams& params,
                                     PreconditionerKind preconditioner = PreconditionerKind::block_jacobi);
    static MicropolarSystem assemble(const ThinDomainGeometry& geom, const PhysicalParams& params,
                                     PreconditionerKind preconditioner = PreconditionerKind::block_jacobi);

    const DiscreteOperatorSet& ops() const { return *ops_; }
    const MacGrid& grid() const { return *ops_->grid; }
    const PhysicalParams& params() const { return params_; }
    PreconditionerKind preconditioner_kind() const { return kind_; }

    int num_u() const { return nu_; }
    int num_w() const { return nu_; }
    int num_p() const { return np_; }
    int dimension() const { return 2 * nu_ + np_; }

    /// Full symmetric matrix (both triangles stored).
    const SparseMatrix& matrix() const { return matrix_; }
    /// -2 N2 R, the (w, u) block.
    SparseMatrix coupling_block() const;
    /// Rc A + 4 N2 I, the (w, w) block.
    SparseMatrix microrotation_block() const;

    /// Applies the block-diagonal preconditioner; pressure slot is identity
    /// followed by removal of the mean.
    void apply_preconditioner(const Vector& in, Vector& out) const;

private:
    struct Factor;

    std::shared_ptr<const DiscreteOperatorSet> ops_;
    PhysicalParams params_;
    PreconditionerKind kind_ = PreconditionerKind::block_jacobi;
    int nu_ = 0;
    int np_ = 0;
    SparseMatrix matrix_;
    std::shared_ptr<const Factor> factor_;
};

struct SaddleSolution {
    Vector u;
    Vector w;
    Vector pi;  ///< mean-zero
    SolveStats stats;
};

/// Solves the block system for the given face right-hand sides (point values
/// of the force, one per active face). The returned iterate is the best one
/// found; check stats.converged.
SaddleSolution solve(const MicropolarSystem& system, const Vector& rhs_u, const Vector& rhs_w,
                     const SolverOptions& options);

/// Per-equation residual norms of a candidate solution, relative to |rhs|.
struct BlockResiduals {
    double momentum = 0.0;
    double divergence = 0.0;
    double microrotation = 0.0;
};
BlockResiduals block_residuals(const MicropolarSystem& system, const Vector& rhs_u, const Vector& rhs_w,
                               const SaddleSolution& sol);

/// Weighted energy balance <f,u> + <g,w> against
/// <Au,u> + Rc<Aw,w> + 4N2<w,w> - 4N2<Ru,w>; returns |lhs - rhs| / max(|lhs|, tiny).
double energy_identity_residual(const MicropolarSystem& system, const Vector& rhs_u, const Vector& rhs_w,
                                const SaddleSolution& sol);

}  // namespace mpdarcy
