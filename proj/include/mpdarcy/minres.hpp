#pragma once

#include <Eigen/Core>

#include <functional>

namespace mpdarcy {

using LinearMap = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

struct KrylovResult {
    int iterations = 0;
    double residual_estimate = 0.0;  ///< preconditioned residual norm / initial one
    bool converged = false;
};

/// Preconditioned MINRES (Paige-Saunders recurrences) for a symmetric
/// operator and a symmetric positive definite preconditioner.
///
/// `x` holds the initial guess on entry and the final iterate on exit.
/// Stops when the preconditioned residual norm drops below `tol` times its
/// initial value.
KrylovResult minres(const LinearMap& apply, const LinearMap& precondition, const Eigen::VectorXd& b,
                    Eigen::VectorXd& x, double tol, int max_iter);

}  // namespace mpdarcy
