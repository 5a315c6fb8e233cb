#include "mpdarcy/error.hpp"

namespace mpdarcy {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::obstacle_touches_boundary: return "ObstacleTouchesBoundary";
    case ErrorCode::empty_obstacle: return "EmptyObstacle";
    case ErrorCode::empty_fluid: return "EmptyFluid";
    case ErrorCode::resolution_too_coarse: return "ResolutionTooCoarse";
    case ErrorCode::incompatible_tiling: return "IncompatibleTiling";
    case ErrorCode::precondition: return "PreconditionViolated";
    case ErrorCode::geometry_mismatch: return "GeometryMismatch";
    case ErrorCode::singular_problem: return "SingularProblem";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::inconsistent_inputs: return "InconsistentInputs";
    case ErrorCode::invariant_violation: return "InvariantViolation";
    case ErrorCode::not_positive_definite: return "NotPositiveDefinite";
    case ErrorCode::on_cell_boundary: return "OnCellBoundary";
    case ErrorCode::insufficient_runs: return "InsufficientRuns";
    case ErrorCode::incompatible_inputs: return "IncompatibleInputs";
    case ErrorCode::config: return "ConfigError";
    case ErrorCode::io: return "IOError";
    }
    return "UnknownError";
}

bool is_numerical(ErrorCode code)
{
    switch (code) {
    case ErrorCode::singular_problem:
    case ErrorCode::no_convergence:
    case ErrorCode::invariant_violation:
    case ErrorCode::not_positive_definite:
        return true;
    default:
        return false;
    }
}

}  // namespace mpdarcy
