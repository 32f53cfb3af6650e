#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fapsm {

enum class Errc {
  invalid_argument,
  dimension_mismatch,
  unknown_label,
  duplicate_identity,
  zero_vector,
  incomparable_pair,
  empty_gallery,
  no_candidates,
  io_failure,
  parse_failure,
  version_mismatch,
  solve_failure,
  non_convergence,
  all_weights_zero,
  degenerate_statistic,
};

/// Broad failure class; the CLI maps these onto process exit codes.
enum class ErrorClass { validation = 1, io = 2, numerical = 3 };

ErrorClass classify(Errc code) noexcept;
std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }
  ErrorClass error_class() const noexcept { return classify(code_); }

 private:
  Errc code_;
};

}  // namespace fapsm
