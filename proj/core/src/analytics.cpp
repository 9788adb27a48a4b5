#include "mxl/analytics.hpp"

#include <cmath>
#include <ostream>

#include "mxl/detail/format.hpp"
#include "mxl/draws.hpp"
#include "mxl/errors.hpp"

namespace mxl {

double sign_share(double mean, double sd, SignDirection direction) noexcept {
  double negative;
  const double s = std::abs(sd);
  if (s == 0.0) {
    negative = mean < 0.0 ? 1.0 : (mean > 0.0 ? 0.0 : 0.5);
  } else {
    negative = normal_cdf(-mean / s);
  }
  return direction == SignDirection::negative ? negative : 1.0 - negative;
}

AltValues predict_probs(const ChoiceSituation& situation, const PersonCovariates& person,
                        const ModelSpec& spec, const ParameterVector& theta,
                        std::span<const double> draw_block, std::size_t n_draws) {
  spec.check(theta);
  const std::size_t k_dims = spec.n_random();
  if (n_draws == 0 || draw_block.size() < n_draws * k_dims) {
    throw DimensionMismatch("draw block does not hold n_draws x n_random values");
  }
  std::array<SparseRow, kNumAlternatives> rows;
  for (auto alt : kAllAlternatives) {
    if (situation.availability[index_of(alt)]) {
      rows[index_of(alt)] = design_row(situation, person, alt, spec);
    }
  }
  std::vector<int> dim_of(spec.n_terms(), -1);
  for (std::size_t k = 0; k < k_dims; ++k) dim_of[spec.random_terms()[k]] = static_cast<int>(k);

  const auto means = spec.means(theta);
  const auto sds = spec.sds(theta);
  std::vector<double> beta(spec.n_terms());
  AltValues total{};
  for (std::size_t r = 0; r < n_draws; ++r) {
    for (std::size_t i = 0; i < beta.size(); ++i) {
      beta[i] = means[i];
      if (dim_of[i] >= 0) {
        const auto k = static_cast<std::size_t>(dim_of[i]);
        beta[i] += std::abs(sds[k]) * draw_block[r * k_dims + k];
      }
    }
    AltValues v{};
    for (auto alt : kAllAlternatives) {
      for (const auto& [slot, x] : rows[index_of(alt)]) v[index_of(alt)] += beta[slot] * x;
    }
    const auto p = logit_probs(v, situation.availability);
    for (std::size_t j = 0; j < kNumAlternatives; ++j) total[j] += p[j];
  }
  for (auto& t : total) t /= static_cast<double>(n_draws);
  return total;
}

AltValues predict_probs(const ChoiceSituation& situation, const PersonCovariates& person,
                        const ModelSpec& spec, const ParameterVector& theta, std::size_t n_draws) {
  const DrawSet draws = halton_normal_draws(1, n_draws, spec.n_random());
  return predict_probs(situation, person, spec, theta, draws.respondent_block(0), n_draws);
}

void ShareTable::write_csv(std::ostream& out, bool numeric_key) const {
  out << key;
  for (auto alt : kAllAlternatives) out << ',' << to_string(alt);
  out << '\n';
  for (const auto& row : rows) {
    out << (numeric_key ? detail::format_double(row.value) : row.label);
    for (double s : row.shares) out << ',' << detail::format_double(s);
    out << '\n';
  }
}

ShareRow predicted_shares(std::span<const Scenario> scenarios, const ModelSpec& spec,
                          const ParameterVector& theta, std::size_t n_draws) {
  if (scenarios.empty()) throw EmptyScenarioSet("predicted_shares needs at least one scenario");
  const DrawSet draws = halton_normal_draws(1, n_draws, spec.n_random());
  const auto block = draws.respondent_block(0);
  ShareRow row;
  row.label = "mean";
  for (const auto& sc : scenarios) {
    const auto p = predict_probs(sc.situation, sc.person, spec, theta, block, n_draws);
    for (std::size_t j = 0; j < kNumAlternatives; ++j) row.shares[j] += p[j];
  }
  for (auto& s : row.shares) s /= static_cast<double>(scenarios.size());
  return row;
}

ShareTable attribute_sweep(const Scenario& base, const ModelSpec& spec,
                           const ParameterVector& theta, std::string_view covariate,
                           std::span<const double> grid, std::size_t n_draws) {
  if (!spec.uses_covariate(covariate) || covariate == "CONSTANT") {
    throw UnknownCovariate("covariate '" + std::string(covariate) + "' does not enter the model");
  }
  if (grid.empty()) throw InvalidOptions("sweep grid is empty");

  const bool in_situation = base.situation.layout && base.situation.layout->find(covariate);
  const bool in_person = base.person.find(covariate) != base.person.end();
  if (!in_situation && !in_person) {
    throw MissingCovariate(std::string(covariate), base.label, base.situation.situation_index);
  }

  const DrawSet draws = halton_normal_draws(1, n_draws, spec.n_random());
  const auto block = draws.respondent_block(0);
  ShareTable table;
  table.key = std::string(covariate);
  for (double value : grid) {
    Scenario sc = base;
    if (in_situation) {
      sc.situation.set_for_all_alternatives(covariate, value);
    } else {
      sc.person.find(covariate)->second = value;
    }
    ShareRow row;
    row.label = detail::format_double(value);
    row.value = value;
    row.shares = predict_probs(sc.situation, sc.person, spec, theta, block, n_draws);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<double> make_grid(double from, double to, double step) {
  if (!(step != 0.0) || !std::isfinite(step) || (to - from) / step < 0.0) {
    throw InvalidOptions("grid step must be non-zero and point from 'from' towards 'to'");
  }
  const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) grid.push_back(from + static_cast<double>(i) * step);
  return grid;
}

}  // namespace mxl
