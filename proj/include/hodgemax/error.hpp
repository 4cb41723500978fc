#pragma once

#include <stdexcept>
#include <string>

namespace hodgemax {

/// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorKind {
  validation,  // bad input, violated precondition or invariant
  solver,      // a numerical procedure failed to converge or broke down
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error(ErrorKind::solver, what) {}
};

}  // namespace hodgemax
