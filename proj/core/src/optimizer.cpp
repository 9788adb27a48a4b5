#include "mxl/optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace mxl {
namespace {

constexpr double kArmijo = 1e-4;
constexpr double kCurvature = 0.9;
constexpr double kRoundingLevel = 1e-12;
constexpr int kMaxBacktracks = 60;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace

double max_abs(std::span<const double> v) noexcept {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

QuasiNewtonResult maximize_bfgs(const SmoothObjective& objective, std::vector<double> x0,
                                const QuasiNewtonOptions& options) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  QuasiNewtonResult out;

  // Minimize f = -objective throughout.
  std::vector<double> grad_buf(x0.size());
  auto evaluate = [&](const Vec& x, Vec& g) {
    double value = objective(std::span<const double>(x.data(), x.size()), grad_buf);
    ++out.evaluations;
    g = -Eigen::Map<const Vec>(grad_buf.data(), n);
    return -value;
  };

  Vec x = Eigen::Map<const Vec>(x0.data(), n);
  Vec g(n);
  double f = evaluate(x, g);

  Mat h = Mat::Identity(n, n);
  bool h_is_identity = true;
  std::size_t it = 0;

  for (; it < options.max_iterations; ++it) {
    if (g.cwiseAbs().maxCoeff() < options.gradient_tolerance) {
      out.converged = true;
      out.message = "gradient below tolerance";
      break;
    }

    Vec p = -h * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      h.setIdentity();
      h_is_identity = true;
      p = -g;
      slope = g.dot(p);
    }
    if (h_is_identity) {
      // unscaled steepest descent: keep the first trial step modest
      const double pmax = p.cwiseAbs().maxCoeff();
      if (pmax > 1.0) {
        p /= pmax;
        slope /= pmax;
      }
    }

    double alpha = 1.0;
    Vec x_new(n), g_new(n);
    double f_new = f;
    bool accepted = false;
    const double f_slack = kRoundingLevel * (1.0 + std::abs(f));
    for (int k = 0; k < kMaxBacktracks; ++k) {
      x_new = x + alpha * p;
      f_new = evaluate(x_new, g_new);
      if (std::isfinite(f_new)) {
        const bool armijo = f_new <= f + kArmijo * alpha * slope;
        const double new_slope = g_new.dot(p);
        const bool approx_wolfe = f_new <= f + f_slack && new_slope >= kCurvature * slope &&
                                  new_slope <= (1.0 - 2.0 * kArmijo) * -slope;
        if (armijo || approx_wolfe) {
          accepted = true;
          break;
        }
        // safeguarded quadratic interpolation
        const double denom = 2.0 * (f_new - f - alpha * slope);
        double next = denom > 0.0 ? -slope * alpha * alpha / denom : 0.5 * alpha;
        alpha = std::clamp(next, 0.1 * alpha, 0.5 * alpha);
      } else {
        alpha *= 0.1;
      }
    }

    if (!accepted) {
      if (!h_is_identity) {
        h.setIdentity();
        h_is_identity = true;
        continue;
      }
      out.message = "line search failed to make progress";
      break;
    }

    const Vec s = x_new - x;
    const Vec y = g_new - g;
    const bool non_increasing = f_new <= f;
    x = x_new;
    f = f_new;
    g = g_new;

    if (non_increasing && s.cwiseAbs().maxCoeff() < options.step_tolerance) {
      ++it;
      out.converged = true;
      out.message = "step below tolerance";
      break;
    }

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (h_is_identity) {
        h *= sy / y.squaredNorm();
        h_is_identity = false;
      }
      const double rho = 1.0 / sy;
      const Vec hy = h * y;
      const double yhy = y.dot(hy);
      // H+ = (I - rho s y')H(I - rho y s') + rho s s'
      h.noalias() += (rho * rho * yhy + rho) * (s * s.transpose()) -
                     rho * (hy * s.transpose() + s * hy.transpose());
    }
  }

  if (!out.converged && g.cwiseAbs().maxCoeff() < options.gradient_tolerance) {
    out.converged = true;
    out.message = "gradient below tolerance";
  }
  if (it >= options.max_iterations && out.message.empty()) {
    out.message = "iteration limit reached";
  }
  out.iterations = it;
  out.x.assign(x.data(), x.data() + n);
  out.value = -f;
  out.gradient.resize(x0.size());
  for (Eigen::Index i = 0; i < n; ++i) out.gradient[static_cast<std::size_t>(i)] = -g[i];
  return out;
}

}  // namespace mxl
