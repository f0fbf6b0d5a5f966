#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace mixrate {

// Error taxonomy. The CLI maps each category onto a process exit code:
// validation -> 2, numerical infeasibility -> 3, I/O -> 4.
enum class ErrorKind { validation, infeasible, io };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

// Bad argument or violated precondition.
class ArgumentError : public Error {
public:
  explicit ArgumentError(const std::string &what)
      : Error(ErrorKind::validation, what) {}
};

// A parameter left the compact set Theta.
class DomainError : public Error {
public:
  explicit DomainError(const std::string &what)
      : Error(ErrorKind::validation, what) {}
};

// Moment data not realizable (Hankel positivity violated).
class InfeasibleError : public Error {
public:
  InfeasibleError(const std::string &what, std::optional<int> failing_k = {})
      : Error(ErrorKind::infeasible, what), failing_k_(failing_k) {}
  std::optional<int> failing_k() const noexcept { return failing_k_; }

private:
  std::optional<int> failing_k_;
};

// Numerically degenerate input (e.g. nearly coincident roots).
class ConditioningError : public Error {
public:
  explicit ConditioningError(const std::string &what)
      : Error(ErrorKind::infeasible, what) {}
};

// Exponent regression or tree construction could not be carried out.
class DiagnosticError : public Error {
public:
  explicit DiagnosticError(const std::string &what)
      : Error(ErrorKind::infeasible, what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string &what) : Error(ErrorKind::io, what) {}
};

} // namespace mixrate
