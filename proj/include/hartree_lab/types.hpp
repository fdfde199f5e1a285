#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace hartree {

using cd = std::complex<double>;

/// Field contains non-finite samples.
class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two operands live on different grids / meshes.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the admissible domain (t <= 0, sigma out of range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A transport / fixed-point run left the admissible ball.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Step rejection budget exhausted in a time stepper.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested an approximation level the scheme does not support.
class UnsupportedLevelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Config or parameter validation failure; carries every violated condition.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "validation failed:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

}  // namespace hartree
