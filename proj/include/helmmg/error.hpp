#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace helmmg {

using cplx = std::complex<double>;

enum class ErrorCode {
  invalid_argument,
  out_of_range,
  no_propagating_root,
  pole,
  resonance,
  singular,
  io,
  not_converged,
};

std::string_view to_string(ErrorCode code);

/// Error raised by all library components. The code is stable and is what the
/// command line tool prints in its machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace helmmg
