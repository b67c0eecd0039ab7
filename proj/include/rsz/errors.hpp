#ifndef RSZ_ERRORS_HPP
#define RSZ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rsz {

// Failure taxonomy shared by every module.  Codes map onto CLI exit codes:
// configuration-class codes exit 2, numerical-class codes exit 3.
enum class errc {
  non_conforming_grid,
  out_of_domain,
  parse_error,
  non_positive_media,
  factorization_failure,
  non_conforming_layout,
  missing_owner,
  no_convergence,
  adjoint_inconsistent,
  fingerprint_mismatch,
  zero_reference,
  config_error,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::non_conforming_grid:    return "NonConformingGrid";
    case errc::out_of_domain:          return "OutOfDomain";
    case errc::parse_error:            return "ParseError";
    case errc::non_positive_media:     return "NonPositiveMedia";
    case errc::factorization_failure:  return "FactorizationFailure";
    case errc::non_conforming_layout:  return "NonConformingLayout";
    case errc::missing_owner:          return "MissingOwner";
    case errc::no_convergence:         return "NoConvergence";
    case errc::adjoint_inconsistent:   return "AdjointInconsistent";
    case errc::fingerprint_mismatch:   return "FingerprintMismatch";
    case errc::zero_reference:         return "ZeroReference";
    case errc::config_error:           return "ConfigError";
    case errc::io_error:               return "IoError";
  }
  return "Unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const noexcept { return code_; }

  // True for conditions caused by bad inputs rather than numerical breakdown.
  bool is_config() const noexcept {
    switch (code_) {
      case errc::non_conforming_grid:
      case errc::out_of_domain:
      case errc::parse_error:
      case errc::non_positive_media:
      case errc::non_conforming_layout:
      case errc::missing_owner:
      case errc::fingerprint_mismatch:
      case errc::config_error:
      case errc::io_error:
        return true;
      default:
        return false;
    }
  }

 private:
  errc code_;
};

}  // namespace rsz

#endif
