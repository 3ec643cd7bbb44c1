#pragma once

#include <stdexcept>
#include <string>

namespace fpc {

enum class ErrorCode {
  Input = 1,
  SingularDesign,
  SingularHessian,
  SingularAttributes,
  Separation,
  NonConvergence,
  DegenerateDesign,
  MetadataRequired,
  SizeCap,
  EmptySample,
  StudyFailed,
};

const char* to_string(ErrorCode code);

// Every library failure is reported through this type; the C API maps the
// code onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fpc
