#include "powerutil/error.hpp"

namespace powerutil {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "INVALID_ARGUMENT";
    case ErrorCode::divergent: return "DIVERGENT";
    case ErrorCode::quadrature_failure: return "QUADRATURE_FAILURE";
    case ErrorCode::out_of_domain: return "OUT_OF_DOMAIN";
    case ErrorCode::inadmissible_model: return "INADMISSIBLE_MODEL";
    case ErrorCode::no_bracket: return "NO_BRACKET";
    case ErrorCode::bankruptcy_step: return "BANKRUPTCY_STEP";
    case ErrorCode::unreliable: return "UNRELIABLE";
    case ErrorCode::not_closed_form: return "NOT_CLOSED_FORM";
    case ErrorCode::config_error: return "CONFIG_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace powerutil
