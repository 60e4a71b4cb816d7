#include "plrs/errors.hpp"

namespace plrs {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::not_hermitian: return "NotHermitian";
    case ErrorCode::not_positive_definite: return "NotPositiveDefinite";
    case ErrorCode::not_unitary: return "NotUnitary";
    case ErrorCode::singular: return "Singular";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::degenerate_alcove: return "DegenerateAlcove";
    case ErrorCode::constraint_violated: return "ConstraintViolated";
    case ErrorCode::step_unstable: return "StepUnstable";
    }
    return "Unknown";
}

} // namespace plrs
