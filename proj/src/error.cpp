#include "fpc/error.hpp"

namespace fpc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Input: return "input error";
    case ErrorCode::SingularDesign: return "singular design";
    case ErrorCode::SingularHessian: return "singular Hessian";
    case ErrorCode::SingularAttributes: return "singular attributes";
    case ErrorCode::Separation: return "separation";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::DegenerateDesign: return "degenerate design";
    case ErrorCode::MetadataRequired: return "population metadata required";
    case ErrorCode::SizeCap: return "size cap exceeded";
    case ErrorCode::EmptySample: return "empty sample";
    case ErrorCode::StudyFailed: return "study failed";
  }
  return "unknown error";
}

}  // namespace fpc
