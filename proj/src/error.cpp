#include "qswitch/error.hpp"

namespace qswitch {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::IntegrationOverflow: return "integration-overflow";
    case ErrorKind::NotIncrementallyStable: return "not-incrementally-stable";
    case ErrorKind::PrecisionViolated: return "precision-violated";
    case ErrorKind::EmptySpec: return "empty-spec";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Config: return "config";
    case ErrorKind::Format: return "format";
    case ErrorKind::InvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

}  // namespace qswitch
