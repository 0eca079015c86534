#pragma once

#include <stdexcept>
#include <string>

namespace airob {

/// Error categories used across the library. The CLI maps them to exit
/// codes: parse/io/config errors exit 2, everything else (domain errors)
/// exits 1.
enum class errc {
    invalid_parameter,
    quadrature_failure,
    unsupported_sampling,
    no_root,
    ambiguous_root,
    degenerate_estimator,
    breakpoint_ambiguity,
    null_gradient,
    oracle_size,
    infeasible_budget,
    out_of_regime,
    degenerate_weights,
    shape_mismatch,
    parse_error,
    io_error,
    invalid_config,
};

class error : public std::runtime_error {
  public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const noexcept { return code_; }
    bool is_usage_error() const noexcept {
        return code_ == errc::parse_error || code_ == errc::io_error ||
               code_ == errc::invalid_config;
    }

  private:
    errc code_;
};

/// Raised when adaptive quadrature cannot reach the requested tolerance;
/// carries the tolerance that was actually achieved.
class quadrature_error : public error {
  public:
    quadrature_error(const std::string& what, double achieved)
        : error(errc::quadrature_failure, what), achieved_(achieved) {}
    double achieved_tolerance() const noexcept { return achieved_; }

  private:
    double achieved_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace airob
