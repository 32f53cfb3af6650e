#include "fapsm/errors.hpp"

namespace fapsm {

ErrorClass classify(Errc code) noexcept {
  switch (code) {
    case Errc::io_failure:
    case Errc::parse_failure:
    case Errc::version_mismatch:
      return ErrorClass::io;
    case Errc::solve_failure:
    case Errc::non_convergence:
    case Errc::all_weights_zero:
    case Errc::degenerate_statistic:
      return ErrorClass::numerical;
    default:
      return ErrorClass::validation;
  }
}

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::unknown_label: return "unknown-label";
    case Errc::duplicate_identity: return "duplicate-identity";
    case Errc::zero_vector: return "zero-vector";
    case Errc::incomparable_pair: return "incomparable-pair";
    case Errc::empty_gallery: return "empty-gallery";
    case Errc::no_candidates: return "no-candidates";
    case Errc::io_failure: return "io-failure";
    case Errc::parse_failure: return "parse-failure";
    case Errc::version_mismatch: return "version-mismatch";
    case Errc::solve_failure: return "solve-failure";
    case Errc::non_convergence: return "non-convergence";
    case Errc::all_weights_zero: return "all-weights-zero";
    case Errc::degenerate_statistic: return "degenerate-statistic";
  }
  return "unknown";
}

}  // namespace fapsm
