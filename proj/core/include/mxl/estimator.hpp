#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mxl/draws.hpp"
#include "mxl/model_spec.hpp"
#include "mxl/panel.hpp"

namespace mxl {

enum class StdErrMethod : std::uint8_t { bhhh, numerical_hessian };
enum class StartMethod : std::uint8_t { zero, mnl_warm };

std::string_view to_string(StdErrMethod m) noexcept;
std::string_view to_string(StartMethod m) noexcept;
std::optional<StdErrMethod> parse_stderr_method(std::string_view text) noexcept;
std::optional<StartMethod> parse_start_method(std::string_view text) noexcept;

/// Starting value of every standard-deviation slot.
inline constexpr double kInitialSd = 0.1;

struct EstimationOptions {
  std::size_t n_draws = kDefaultDraws;
  std::uint64_t discard = kDefaultDiscard;
  std::uint64_t seed = 0;
  bool scramble = false;  // random-shift the Halton draws keyed by `seed`
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-5;
  double step_tolerance = 1e-8;
  StdErrMethod stderr_method = StdErrMethod::bhhh;
  StartMethod start = StartMethod::mnl_warm;
  std::optional<ParameterVector> initial;  // overrides `start` when set

  /// Throws InvalidOptions.
  void validate() const;
};

/// The draw set an estimation run uses for these options. Fixed-only specs
/// need a single draw per respondent.
DrawSet estimation_draws(std::size_t n_respondents, const ModelSpec& spec,
                         const EstimationOptions& options);

struct EstimationResult {
  std::vector<std::string> slot_names;
  ParameterVector theta_hat;  // sd slots reported as |sd|
  std::vector<std::optional<double>> std_errors;
  std::vector<std::optional<double>> p_values;

  double ll_final = 0.0;
  double ll_null = 0.0;            // equal shares over available alternatives
  double ll_null_constants = 0.0;  // constants-only MNL
  double ll_mnl = 0.0;             // all coefficients fixed
  double rho2 = 0.0;
  double rho2_constants = 0.0;
  double rho2_mnl = 0.0;
  double rho2_mnl_constants = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::size_t n_obs = 0;
  std::size_t n_respondents = 0;

  bool converged = false;
  std::size_t iterations = 0;
  std::size_t mnl_iterations = 0;
  double gradient_max_norm = 0.0;
  std::string message;
  bool hessian_singular = false;
  std::vector<std::size_t> unidentified_slots;

  DrawMeta draw_meta;
  std::size_t draws_used = 0;
  EstimationOptions options;
};

/// Maximum simulated likelihood with one fixed draw set for the whole run.
/// Non-convergence is reported through `converged`, not thrown.
EstimationResult estimate(const ChoicePanel& panel, const ModelSpec& spec,
                          const EstimationOptions& options = {});

struct FitStats {
  double rho2 = 0.0;
  double aic = 0.0;
  double bic = 0.0;
};

/// McFadden rho^2 = 1 - ll_final/ll_null, AIC and BIC. Throws InvalidLL.
FitStats fit_stats(double ll_final, double ll_null, std::size_t n_obs, std::size_t n_params);

enum class NullModel : std::uint8_t { equal_shares, constants_only };

double null_loglik(const ChoicePanel& panel, NullModel definition);

/// Two-sided normal test p-value for estimate / std_error.
double two_sided_p_value(double estimate, double std_error) noexcept;

/// Standard errors from an information matrix (row-major n x n). Slots in
/// its numerical null space come back empty and are listed in `unidentified`.
struct Covariance {
  std::vector<std::optional<double>> std_errors;
  std::vector<std::size_t> unidentified;
  bool singular = false;
};
Covariance invert_information(const std::vector<double>& information, std::size_t n);

}  // namespace mxl
