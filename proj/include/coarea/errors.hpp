#pragma once

// Typed errors shared across the library. Every failure mode a caller is
// expected to branch on gets its own type; messages carry the diagnostics.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coarea {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Lexer/parser failure. Position is 1-based within the source text.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int position)
      : Error(msg + " at position " + std::to_string(position)),
        position_(position) {}
  int position() const { return position_; }

 private:
  int position_;
};

// Evaluation hit a point outside the expression's domain (log of a
// non-positive value, division by zero, ...). Carries the offending
// sub-expression in printed form.
class DomainError : public Error {
 public:
  DomainError(const std::string& what_failed, std::string subexpr)
      : Error(what_failed + " in sub-expression '" + subexpr + "'"),
        subexpr_(std::move(subexpr)) {}
  const std::string& subexpr() const { return subexpr_; }

 private:
  std::string subexpr_;
};

// |grad f| fell below the configured floor; the band is not free of
// critical points along the attempted path.
class CriticalPointDetected : public Error {
 public:
  CriticalPointDetected(const std::string& msg, std::vector<double> point,
                        double grad_norm)
      : Error(msg), point_(std::move(point)), grad_norm_(grad_norm) {}
  const std::vector<double>& point() const { return point_; }
  double grad_norm() const { return grad_norm_; }

 private:
  std::vector<double> point_;
  double grad_norm_;
};

// Newton projection onto a level set failed to reach tolerance.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& msg, std::vector<double> last_point,
                 double residual)
      : Error(msg), last_point_(std::move(last_point)), residual_(residual) {}
  const std::vector<double>& last_point() const { return last_point_; }
  double residual() const { return residual_; }

 private:
  std::vector<double> last_point_;
  double residual_;
};

// Radial seeding found no sign change of f - a along a ray.
class NoBracket : public Error {
 public:
  using Error::Error;
};

// A chart's tangent minors collapsed (rank < n-1).
class DegenerateChart : public Error {
 public:
  using Error::Error;
};

// A point claimed to lie on a level surface does not.
class LevelMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace coarea
