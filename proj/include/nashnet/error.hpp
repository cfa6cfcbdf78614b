#ifndef NASHNET_ERROR_HPP
#define NASHNET_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nashnet {

/// Precondition of an operation was violated by the caller.
class ContractError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// An argument is outside the mathematical domain of an operation
/// (e.g. a Perron vector requested for a reducible matrix).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A product of stochastic matrices did not settle within its iteration cap.
class NonConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Scenario text could not be parsed. Line and column are 1-based; 0 means unknown.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

/// A parsed scenario violates one or more assumption clauses.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(std::vector<std::string> clauses)
      : std::runtime_error(join(clauses)), clauses_(std::move(clauses)) {}

  const std::vector<std::string>& clauses() const noexcept { return clauses_; }

private:
  static std::string join(const std::vector<std::string>& clauses) {
    std::string out = "validation failed:";
    for (const auto& c : clauses) out += "\n  " + c;
    return out;
  }

  std::vector<std::string> clauses_;
};

/// A non-finite value appeared during a run.
class NumericError : public std::runtime_error {
public:
  NumericError(const std::string& what, long long iteration)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  long long iteration() const noexcept { return iteration_; }

private:
  long long iteration_;
};

/// A computation would exceed its configured evaluation budget.
class ResourceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An internal invariant that the assumptions guarantee was broken.
class InvariantError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace nashnet

#endif // NASHNET_ERROR_HPP
