#pragma once

#include <stdexcept>
#include <string>

namespace qswitch {

enum class ErrorKind {
  IntegrationOverflow,
  NotIncrementallyStable,
  PrecisionViolated,
  EmptySpec,
  Domain,
  Config,
  Format,
  InvalidArgument,
};

const char* to_string(ErrorKind kind) noexcept;

/* All library failures are reported through this exception; `kind()` lets
 * callers (the CLI in particular) map failures onto exit codes. */
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qswitch
