#pragma once

#include <stdexcept>
#include <string>

namespace plrs {

enum class ErrorCode {
    invalid_argument,
    not_hermitian,
    not_positive_definite,
    not_unitary,
    singular,
    no_convergence,
    degenerate_alcove,
    constraint_violated,
    step_unstable,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type for the library; the C API maps `code()` onto status values.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace plrs
