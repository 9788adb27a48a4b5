#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mxl/likelihood.hpp"
#include "mxl/model_spec.hpp"
#include "mxl/panel.hpp"

namespace mxl {

enum class SignDirection : std::uint8_t { negative, positive };

/// Share of a N(mean, sd^2) coefficient population with the given sign.
/// Requires sd >= 0 (the absolute value is used regardless).
double sign_share(double mean, double sd, SignDirection direction) noexcept;

/// A single choice context to predict for.
struct Scenario {
  std::string label;
  ChoiceSituation situation;
  PersonCovariates person;
};

/// Mixed probabilities averaged over an R x K draw block.
AltValues predict_probs(const ChoiceSituation& situation, const PersonCovariates& person,
                        const ModelSpec& spec, const ParameterVector& theta,
                        std::span<const double> draw_block, std::size_t n_draws);

/// Same, with the first R Halton points (default discard) as the block.
AltValues predict_probs(const ChoiceSituation& situation, const PersonCovariates& person,
                        const ModelSpec& spec, const ParameterVector& theta, std::size_t n_draws);

struct ShareRow {
  std::string label;
  double value = 0.0;  // grid value for sweeps
  AltValues shares{};
};

/// Plot-ready table: one row per scenario or grid value, shares in
/// canonical alternative order.
struct ShareTable {
  std::string key = "label";
  std::vector<ShareRow> rows;

  /// Header "<key>,ask_ride,auto,...". Sweep tables print the grid value.
  void write_csv(std::ostream& out, bool numeric_key = false) const;
};

/// Average predicted probabilities across scenarios. Every scenario shares
/// the same draw block. Throws EmptyScenarioSet.
ShareRow predicted_shares(std::span<const Scenario> scenarios, const ModelSpec& spec,
                          const ParameterVector& theta, std::size_t n_draws);

/// One row per grid value with `covariate` overridden on the base scenario.
/// Uses a common draw block across grid points. Throws UnknownCovariate.
ShareTable attribute_sweep(const Scenario& base, const ModelSpec& spec,
                           const ParameterVector& theta, std::string_view covariate,
                           std::span<const double> grid, std::size_t n_draws);

/// Inclusive grid from..to in steps of `step`.
std::vector<double> make_grid(double from, double to, double step);

}  // namespace mxl
