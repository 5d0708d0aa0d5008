#pragma once

#include <stdexcept>
#include <string>

namespace powerutil {

enum class ErrorCode {
  invalid_argument,
  divergent,
  quadrature_failure,
  out_of_domain,
  inadmissible_model,
  no_bracket,
  bankruptcy_step,
  unreliable,
  not_closed_form,
  config_error,
};

/// Upper-case identifier used in reports, e.g. "NO_BRACKET".
const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above. The
/// message starts with the name of the operation that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace powerutil
