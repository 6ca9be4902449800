#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace corrlab {

enum class ErrorKind {
  InvalidArgument,
  RepresentationMismatch,
  GridMismatch,
  SupportViolation,
  DiscretizationFailure,
  NotPartner,
  InsufficientSupport,
  Config,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::RepresentationMismatch: return "representation_mismatch";
    case ErrorKind::GridMismatch: return "grid_mismatch";
    case ErrorKind::SupportViolation: return "support_violation";
    case ErrorKind::DiscretizationFailure: return "discretization_failure";
    case ErrorKind::NotPartner: return "not_partner";
    case ErrorKind::InsufficientSupport: return "insufficient_support";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

// All precondition failures in the library surface as this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw Error(kind, msg);
}

}  // namespace detail
}  // namespace corrlab
