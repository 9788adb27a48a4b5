#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mxl {

/// Objective to maximize: returns f(x) and writes its gradient into `grad`.
using SmoothObjective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct QuasiNewtonOptions {
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-5;  // max-norm
  double step_tolerance = 1e-8;      // max-norm of the accepted step
};

struct QuasiNewtonResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> gradient;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::string message;
};

/// BFGS with an inverse-Hessian update and a backtracking line search.
///
/// Steps are accepted on sufficient increase (Armijo), or on the
/// approximate Wolfe test once function differences fall to rounding
/// level. Returns the best iterate found; `converged` is set when the
/// gradient max-norm or an accepted step drops below tolerance.
QuasiNewtonResult maximize_bfgs(const SmoothObjective& objective, std::vector<double> x0,
                                const QuasiNewtonOptions& options = {});

double max_abs(std::span<const double> v) noexcept;

}  // namespace mxl
