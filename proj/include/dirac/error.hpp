#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dirac {

enum class ErrorKind {
  parse,
  io,
  parameter,
  domain,
  grid_mismatch,
  precondition,
  ill_posed,
  residual,
  non_contractive,
  moebius_pole,
  not_accelerant,
  invalid_params,
  pole,
  truncation,
  internal,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind (used by the CLI for the
/// error JSON and exit code) and an optional free-form context string.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string context = {})
      : std::runtime_error(message), kind_(kind), context_(std::move(context)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& context() const noexcept { return context_; }

 private:
  ErrorKind kind_;
  std::string context_;
};

/// Non-fatal findings attached to a result (truncation bounds above tolerance,
/// coarse steps, evaluations outside guaranteed regions).
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  bool clean() const { return warnings.empty(); }
};

}  // namespace dirac
