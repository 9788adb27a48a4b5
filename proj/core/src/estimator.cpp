#include "mxl/estimator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "mxl/covariates.hpp"
#include "mxl/errors.hpp"
#include "mxl/likelihood.hpp"
#include "mxl/optimizer.hpp"

namespace mxl {

std::string_view to_string(StdErrMethod m) noexcept {
  return m == StdErrMethod::bhhh ? "bhhh" : "numerical_hessian";
}

std::string_view to_string(StartMethod m) noexcept {
  return m == StartMethod::zero ? "zero" : "mnl_warm";
}

std::optional<StdErrMethod> parse_stderr_method(std::string_view text) noexcept {
  if (text == "bhhh") return StdErrMethod::bhhh;
  if (text == "numerical_hessian" || text == "hessian") return StdErrMethod::numerical_hessian;
  return std::nullopt;
}

std::optional<StartMethod> parse_start_method(std::string_view text) noexcept {
  if (text == "zero") return StartMethod::zero;
  if (text == "mnl_warm" || text == "mnl") return StartMethod::mnl_warm;
  return std::nullopt;
}

void EstimationOptions::validate() const {
  if (n_draws < 1) throw InvalidOptions("n_draws must be >= 1");
  if (!(gradient_tolerance > 0.0)) throw InvalidOptions("gradient_tolerance must be > 0");
  if (!(step_tolerance > 0.0)) throw InvalidOptions("step_tolerance must be > 0");
}

DrawSet estimation_draws(std::size_t n_respondents, const ModelSpec& spec,
                         const EstimationOptions& options) {
  const std::size_t r = spec.n_random() == 0 ? 1 : options.n_draws;
  return halton_normal_draws(std::max<std::size_t>(n_respondents, 1), r, spec.n_random(),
                             options.discard,
                             options.scramble ? std::optional(options.seed) : std::nullopt);
}

double two_sided_p_value(double estimate, double std_error) noexcept {
  return std::erfc(std::abs(estimate / std_error) / std::sqrt(2.0));
}

FitStats fit_stats(double ll_final, double ll_null, std::size_t n_obs, std::size_t n_params) {
  if (ll_final > 0.0) throw InvalidLL("log-likelihood must be <= 0, got " + std::to_string(ll_final));
  if (!(ll_null < 0.0)) throw InvalidLL("null log-likelihood must be < 0");
  const double k = static_cast<double>(n_params);
  FitStats s;
  s.rho2 = 1.0 - ll_final / ll_null;
  s.aic = 2.0 * k - 2.0 * ll_final;
  s.bic = k * std::log(static_cast<double>(n_obs)) - 2.0 * ll_final;
  return s;
}

namespace {

QuasiNewtonResult fit_fixed(const ChoicePanel& panel, const ModelSpec& spec,
                            std::vector<double> start, const QuasiNewtonOptions& qn) {
  SimulatedLikelihood model(panel, spec);
  const DrawSet draws = halton_normal_draws(std::max<std::size_t>(panel.respondents.size(), 1), 1,
                                            spec.n_random(), 0);
  ParameterVector theta{std::move(start)};
  auto objective = [&](std::span<const double> x, std::span<double> g) {
    std::copy(x.begin(), x.end(), theta.values.begin());
    return model.loglik_grad(theta, draws, g);
  };
  return maximize_bfgs(objective, theta.values, qn);
}

ModelSpec constants_only_spec() {
  std::vector<UtilityTerm> terms;
  for (auto alt : kAllAlternatives) {
    if (alt == kBaseAlternative) continue;
    terms.push_back({alt, std::string(cov::CONSTANT), "asc_" + std::string(to_string(alt)),
                     TermKind::fixed});
  }
  return ModelSpec(kBaseAlternative, std::move(terms));
}

std::vector<double> numerical_information(const SimulatedLikelihood& model,
                                          const ParameterVector& theta, const DrawSet& draws) {
  const std::size_t n = theta.size();
  std::vector<double> hess(n * n);
  std::vector<double> gp(n), gm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta[i]));
    ParameterVector tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    model.loglik_grad(tp, draws, gp);
    model.loglik_grad(tm, draws, gm);
    for (std::size_t j = 0; j < n; ++j) hess[i * n + j] = (gp[j] - gm[j]) / (2.0 * h);
  }
  // information = -H, symmetrized
  std::vector<double> info(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) info[i * n + j] = -0.5 * (hess[i * n + j] + hess[j * n + i]);
  }
  return info;
}

std::vector<double> bhhh_information(const SimulatedLikelihood& model, const ParameterVector& theta,
                                     const DrawSet& draws) {
  const std::size_t n = theta.size();
  const std::size_t m = model.n_respondents();
  std::vector<double> scores(m * n);
  model.contributions(theta, draws, {}, scores);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> s(
      scores.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd b = s.transpose() * s;
  std::vector<double> info(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      info[i * n + j] = b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return info;
}

}  // namespace

Covariance invert_information(const std::vector<double>& information, std::size_t n) {
  Covariance out;
  out.std_errors.assign(n, std::nullopt);
  if (n == 0) return out;

  // Work on the unit-diagonal correlation form so slot scales do not matter.
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = information[i * n + i];
    if (d > 0.0 && std::isfinite(d)) {
      live.push_back(i);
    } else {
      out.unidentified.push_back(i);
    }
  }

  const auto m = static_cast<Eigen::Index>(live.size());
  Eigen::VectorXd scale(m);
  Eigen::MatrixXd c(m, m);
  for (Eigen::Index a = 0; a < m; ++a) scale[a] = 1.0 / std::sqrt(information[live[a] * n + live[a]]);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      c(a, b) = information[live[a] * n + live[b]] * scale[a] * scale[b];
    }
  }

  if (m > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    const auto& lambda = es.eigenvalues();
    const auto& vecs = es.eigenvectors();
    constexpr double kRankTol = 1e-9;
    const double tol = kRankTol * std::max(1.0, lambda.cwiseAbs().maxCoeff());

    Eigen::VectorXd null_weight = Eigen::VectorXd::Zero(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      if (lambda[k] <= tol) null_weight += vecs.col(k).cwiseAbs2();
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index a = 0; a < m; ++a) {
      if (null_weight[a] > 1e-3) {
        out.unidentified.push_back(live[a]);
      } else {
        keep.push_back(a);
      }
    }

    const auto q = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd sub(q, q);
    for (Eigen::Index a = 0; a < q; ++a) {
      for (Eigen::Index b = 0; b < q; ++b) sub(a, b) = c(keep[a], keep[b]);
    }
    if (q > 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sub_es(sub);
      const auto& sl = sub_es.eigenvalues();
      const auto& sv = sub_es.eigenvectors();
      const double sub_tol = kRankTol * std::max(1.0, sl.cwiseAbs().maxCoeff());
      for (Eigen::Index a = 0; a < q; ++a) {
        double var = 0.0;
        bool ok = true;
        for (Eigen::Index k = 0; k < q; ++k) {
          if (sl[k] <= sub_tol) {
            ok = false;
            break;
          }
          var += sv(a, k) * sv(a, k) / sl[k];
        }
        if (ok && var > 0.0) {
          const double s = scale[keep[a]];
          out.std_errors[live[keep[a]]] = std::sqrt(var) * s;
        } else {
          out.unidentified.push_back(live[keep[a]]);
        }
      }
    }
  }

  std::sort(out.unidentified.begin(), out.unidentified.end());
  out.unidentified.erase(std::unique(out.unidentified.begin(), out.unidentified.end()),
                         out.unidentified.end());
  for (auto i : out.unidentified) out.std_errors[i] = std::nullopt;
  out.singular = !out.unidentified.empty();
  return out;
}

double null_loglik(const ChoicePanel& panel, NullModel definition) {
  if (definition == NullModel::equal_shares) {
    double ll = 0.0;
    for (const auto& r : panel.respondents) {
      for (const auto& s : r.situations) {
        ll -= std::log(static_cast<double>(count_available(s.availability)));
      }
    }
    return ll;
  }
  const ModelSpec spec = constants_only_spec();
  QuasiNewtonOptions qn;
  qn.max_iterations = 1000;
  qn.gradient_tolerance = 1e-7;
  qn.step_tolerance = 1e-12;
  const auto fit = fit_fixed(panel, spec, std::vector<double>(spec.n_slots(), 0.0), qn);
  // never report below the equal-shares value it nests
  return std::max(fit.value, null_loglik(panel, NullModel::equal_shares));
}

EstimationResult estimate(const ChoicePanel& panel, const ModelSpec& spec,
                          const EstimationOptions& options) {
  options.validate();
  if (options.initial) spec.check(*options.initial);

  EstimationResult res;
  res.options = options;
  res.slot_names = spec.slot_names();
  res.n_obs = panel.n_observations();
  res.n_respondents = panel.respondents.size();

  QuasiNewtonOptions qn;
  qn.max_iterations = options.max_iterations;
  qn.gradient_tolerance = options.gradient_tolerance;
  qn.step_tolerance = options.step_tolerance;

  // Restricted fit with every coefficient fixed.
  const ModelSpec fixed_spec = spec.with_all_fixed();
  const auto mnl = fit_fixed(panel, fixed_spec, std::vector<double>(spec.n_terms(), 0.0), qn);
  res.ll_mnl = mnl.value;
  res.mnl_iterations = mnl.iterations;

  std::vector<double> start(spec.n_slots(), 0.0);
  if (options.initial) {
    start = options.initial->values;
  } else {
    if (options.start == StartMethod::mnl_warm) {
      std::copy(mnl.x.begin(), mnl.x.end(), start.begin());
    }
    std::fill(start.begin() + static_cast<std::ptrdiff_t>(spec.n_terms()), start.end(), kInitialSd);
  }

  const SimulatedLikelihood model(panel, spec);
  const DrawSet draws = estimation_draws(panel.respondents.size(), spec, options);
  res.draw_meta = draws.meta();
  res.draws_used = draws.draws();

  ParameterVector theta{start};
  auto objective = [&](std::span<const double> x, std::span<double> g) {
    std::copy(x.begin(), x.end(), theta.values.begin());
    return model.loglik_grad(theta, draws, g);
  };
  const auto fit = maximize_bfgs(objective, start, qn);

  res.theta_hat.values = fit.x;
  for (std::size_t k = 0; k < spec.n_random(); ++k) {
    auto& sd = res.theta_hat.values[spec.sd_slot(k)];
    sd = std::abs(sd);
  }
  res.ll_final = fit.value;
  res.converged = fit.converged;
  res.iterations = fit.iterations;
  res.message = fit.message;
  {
    std::vector<double> g(spec.n_slots());
    model.loglik_grad(res.theta_hat, draws, g);
    res.gradient_max_norm = max_abs(g);
  }

  const auto info = options.stderr_method == StdErrMethod::bhhh
                        ? bhhh_information(model, res.theta_hat, draws)
                        : numerical_information(model, res.theta_hat, draws);
  const auto cov = invert_information(info, spec.n_slots());
  res.std_errors = cov.std_errors;
  res.unidentified_slots = cov.unidentified;
  res.hessian_singular = cov.singular;
  res.p_values.assign(spec.n_slots(), std::nullopt);
  for (std::size_t i = 0; i < spec.n_slots(); ++i) {
    if (res.std_errors[i]) res.p_values[i] = two_sided_p_value(res.theta_hat[i], *res.std_errors[i]);
  }

  res.ll_null = null_loglik(panel, NullModel::equal_shares);
  res.ll_null_constants = null_loglik(panel, NullModel::constants_only);
  if (res.ll_null < 0.0 && res.ll_final <= 0.0) {
    const auto fs = fit_stats(res.ll_final, res.ll_null, res.n_obs, spec.n_slots());
    res.rho2 = fs.rho2;
    res.aic = fs.aic;
    res.bic = fs.bic;
    res.rho2_mnl = 1.0 - res.ll_mnl / res.ll_null;
  }
  if (res.ll_null_constants < 0.0) {
    res.rho2_constants = 1.0 - res.ll_final / res.ll_null_constants;
    res.rho2_mnl_constants = 1.0 - res.ll_mnl / res.ll_null_constants;
  }
  return res;
}

}  // namespace mxl
