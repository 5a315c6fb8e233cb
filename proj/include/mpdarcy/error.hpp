#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpdarcy {

enum class ErrorCode {
    obstacle_touches_boundary,
    empty_obstacle,
    empty_fluid,
    resolution_too_coarse,
    incompatible_tiling,
    precondition,
    geometry_mismatch,
    singular_problem,
    no_convergence,
    inconsistent_inputs,
    invariant_violation,
    not_positive_definite,
    on_cell_boundary,
    insufficient_runs,
    incompatible_inputs,
    config,
    io,
};

std::string_view to_string(ErrorCode code);

/// Numerical failures map to exit code 1, everything else (configuration,
/// I/O, violated preconditions) to exit code 2.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mpdarcy
