#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdmpis {

enum class ErrorKind {
  invalid_argument,
  invalid_state,
  majorant_violation,
  model_definition,
  runaway_simulation,
  domain,
  decomposition,
  objective_undefined,
  invalid_start,
  config,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying one of the library's error kinds. The CLI maps the kind
/// to an exit status; tests match on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pdmpis
