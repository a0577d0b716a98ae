#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tideh {

enum class ErrorCode {
    invalid_argument,
    causality_violation,
    non_finite,
    undefined_rate,
    no_bins,
    underdetermined,
    degenerate_shape,
    empty_training,
    objective_failure,
    step_too_coarse,
    rebin,
    rank_deficient,
    not_fitted,
    supercritical,
    parse,
    missing_origin,
    io,
    bin_misalignment,
    mismatched_sweeps,
    inconsistent_results,
    fold_leak,
};

[[nodiscard]] std::string_view error_code_name(ErrorCode code) noexcept;

// Every failure raised by the library carries a stable machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace tideh
