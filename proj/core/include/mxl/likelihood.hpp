#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mxl/draws.hpp"
#include "mxl/model_spec.hpp"
#include "mxl/panel.hpp"

namespace mxl {

/// Probabilities below this are clamped before taking logs.
inline constexpr double kProbabilityFloor = 1e-300;

/// Panels with more situations per respondent than this accumulate the
/// per-draw product in log space.
inline constexpr std::size_t kDirectProductMaxSituations = 20;

using AltValues = std::array<double, kNumAlternatives>;

/// V = sum over terms of (mean + |sd| z) x for random terms, mean x for fixed.
/// `means` has n_terms entries, `sds` and `draw_row` n_random entries.
double systematic_utility(const ChoiceSituation& situation, const PersonCovariates& person,
                          AlternativeId alt, const ModelSpec& spec, std::span<const double> means,
                          std::span<const double> sds, std::span<const double> draw_row,
                          std::string_view respondent_id = {});

/// Max-shifted softmax over available alternatives; unavailable ones get
/// exactly zero. Throws NoAvailableAlternative.
AltValues logit_probs(const AltValues& utilities, const Availability& availability);

/// (1/R) sum_r prod_t P(chosen_t | theta, z_r) for one respondent.
/// `draw_block` is that respondent's R x K block.
double panel_sim_prob(const Respondent& respondent, const ModelSpec& spec,
                      const ParameterVector& theta, std::span<const double> draw_block,
                      std::size_t n_draws);

double sim_loglik(const ChoicePanel& panel, const ModelSpec& spec, const ParameterVector& theta,
                  const DrawSet& draws);

std::vector<double> sim_loglik_grad(const ChoicePanel& panel, const ModelSpec& spec,
                                    const ParameterVector& theta, const DrawSet& draws);

/// Panel compiled against a spec for repeated likelihood evaluation.
///
/// Design rows are resolved once; evaluation is a pure function of
/// (theta, draws) and sums respondents in index order, so results are
/// bit-reproducible.
class SimulatedLikelihood {
 public:
  /// Throws MissingCovariate if the panel lacks a covariate the spec uses.
  SimulatedLikelihood(const ChoicePanel& panel, const ModelSpec& spec);

  std::size_t n_respondents() const noexcept { return respondents_.size(); }
  std::size_t n_observations() const noexcept { return situations_.size(); }
  std::size_t n_slots() const noexcept { return n_terms_ + random_terms_.size(); }
  std::size_t n_random() const noexcept { return random_terms_.size(); }

  double loglik(const ParameterVector& theta, const DrawSet& draws) const;

  /// Fills `grad` (size n_slots) and returns the log-likelihood.
  double loglik_grad(const ParameterVector& theta, const DrawSet& draws,
                     std::span<double> grad) const;

  /// Per-respondent log contributions and scores (row-major
  /// n_respondents x n_slots). Returns the total log-likelihood.
  double contributions(const ParameterVector& theta, const DrawSet& draws,
                       std::span<double> respondent_ll, std::span<double> scores) const;

  /// Simulated probability for respondent n (before flooring).
  double respondent_prob(std::size_t n, const ParameterVector& theta, const DrawSet& draws) const;

 private:
  struct Entry {
    std::uint32_t term;
    double x;
  };
  struct Situation {
    std::uint8_t n_avail = 0;
    std::uint8_t chosen = 0;  // position within the available list
    std::array<std::uint32_t, kNumAlternatives + 1> offsets{};  // into entries_
  };
  struct RespondentRange {
    std::size_t first = 0;
    std::size_t count = 0;
  };

  double respondent_eval(std::size_t n, std::span<const double> beta_mean,
                         std::span<const double> abs_sd, std::span<const double> sd_sign,
                         std::span<const double> draw_block, std::size_t n_draws,
                         std::span<double> score, std::vector<double>& work,
                         double* prob_out) const;

  void check(const ParameterVector& theta, const DrawSet& draws) const;

  std::size_t n_terms_;
  std::vector<std::size_t> random_terms_;
  std::vector<Entry> entries_;
  std::vector<Situation> situations_;
  std::vector<RespondentRange> respondents_;
};

}  // namespace mxl
