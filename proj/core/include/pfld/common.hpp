#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace pfld {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Invalid sizes, out-of-range indices, malformed configuration values.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN/inf intermediates, all-zero weight sums, collapsed populations.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace pfld
