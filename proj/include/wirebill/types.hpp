#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace wirebill {

// Ambient dimension is runtime-sized but capped so vectors stay on the stack.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxDim, kMaxDim>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Thrown when an iterative computation fails to reach its tolerance
/// (solver stagnation, non-convergent quadrature, integrator underflow).
/// Input/validation problems use std::invalid_argument instead.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wirebill
