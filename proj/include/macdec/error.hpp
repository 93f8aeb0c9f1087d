#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace macdec {

/// One failed invariant. `where` names the offending index, `residual` is the
/// amount by which the invariant is violated (0 when not numeric).
struct Violation {
  std::string where;
  std::string message;
  double residual = 0.0;
};

std::string format_violations(const std::vector<Violation>& violations);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Thrown when a constructed object fails validation.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : std::runtime_error(format_violations(violations)), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver or generator limit was hit. `count` is the size that would have been needed.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& what, std::size_t count, std::size_t cap)
      : std::runtime_error(what + ": " + std::to_string(count) + " exceeds cap " + std::to_string(cap)),
        count_(count),
        cap_(cap) {}
  std::size_t count() const { return count_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t count_;
  std::size_t cap_;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_violations(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.where + ": " + v.message;
    if (v.residual != 0.0) out += " (residual " + std::to_string(v.residual) + ")";
  }
  return out;
}

}  // namespace macdec
