#include "mxl/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mxl/errors.hpp"

namespace mxl {
namespace {

const double kLogFloor = std::log(kProbabilityFloor);

}  // namespace

double systematic_utility(const ChoiceSituation& situation, const PersonCovariates& person,
                          AlternativeId alt, const ModelSpec& spec, std::span<const double> means,
                          std::span<const double> sds, std::span<const double> draw_row,
                          std::string_view respondent_id) {
  if (means.size() != spec.n_terms() || sds.size() != spec.n_random() ||
      draw_row.size() < spec.n_random()) {
    throw DimensionMismatch("utility inputs do not match the spec");
  }
  double v = 0.0;
  for (const auto& [slot, x] : design_row(situation, person, alt, spec, respondent_id)) {
    double coef = means[slot];
    if (auto k = spec.random_dim(slot)) coef += std::abs(sds[*k]) * draw_row[*k];
    v += coef * x;
  }
  return v;
}

AltValues logit_probs(const AltValues& utilities, const Availability& availability) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < kNumAlternatives; ++j) {
    if (availability[j]) m = std::max(m, utilities[j]);
  }
  if (m == -std::numeric_limits<double>::infinity()) {
    throw NoAvailableAlternative("no alternative is available");
  }
  AltValues p{};
  double sum = 0.0;
  for (std::size_t j = 0; j < kNumAlternatives; ++j) {
    if (availability[j]) {
      p[j] = std::exp(utilities[j] - m);
      sum += p[j];
    }
  }
  for (auto& x : p) x /= sum;
  return p;
}

double panel_sim_prob(const Respondent& respondent, const ModelSpec& spec,
                      const ParameterVector& theta, std::span<const double> draw_block,
                      std::size_t n_draws) {
  spec.check(theta);
  const std::size_t k_dims = spec.n_random();
  if (n_draws == 0 || draw_block.size() != n_draws * k_dims) {
    throw DimensionMismatch("draw block does not hold n_draws x n_random values");
  }
  const auto means = spec.means(theta);
  const auto sds = spec.sds(theta);
  const bool log_space = respondent.situations.size() > kDirectProductMaxSituations;

  double total = 0.0;
  for (std::size_t r = 0; r < n_draws; ++r) {
    const auto z = draw_block.subspan(r * k_dims, k_dims);
    double prod = 1.0;
    double log_prod = 0.0;
    for (const auto& s : respondent.situations) {
      AltValues v{};
      for (auto alt : kAllAlternatives) {
        if (s.availability[index_of(alt)]) {
          v[index_of(alt)] = systematic_utility(s, respondent.person, alt, spec, means, sds, z,
                                                respondent.id);
        }
      }
      const double p = logit_probs(v, s.availability)[index_of(s.chosen)];
      if (log_space) {
        log_prod += std::log(p);
      } else {
        prod *= p;
      }
    }
    total += log_space ? std::exp(log_prod) : prod;
  }
  return total / static_cast<double>(n_draws);
}

double sim_loglik(const ChoicePanel& panel, const ModelSpec& spec, const ParameterVector& theta,
                  const DrawSet& draws) {
  return SimulatedLikelihood(panel, spec).loglik(theta, draws);
}

std::vector<double> sim_loglik_grad(const ChoicePanel& panel, const ModelSpec& spec,
                                    const ParameterVector& theta, const DrawSet& draws) {
  std::vector<double> grad(spec.n_slots());
  SimulatedLikelihood(panel, spec).loglik_grad(theta, draws, grad);
  return grad;
}

SimulatedLikelihood::SimulatedLikelihood(const ChoicePanel& panel, const ModelSpec& spec)
    : n_terms_(spec.n_terms()), random_terms_(spec.random_terms()) {
  for (const auto& resp : panel.respondents) {
    RespondentRange range{situations_.size(), resp.situations.size()};
    for (const auto& s : resp.situations) {
      Situation compiled;
      if (!s.availability[index_of(s.chosen)]) throw ChosenUnavailable(resp.id, s.situation_index);
      std::uint8_t pos = 0;
      for (auto alt : kAllAlternatives) {
        if (!s.availability[index_of(alt)]) continue;
        compiled.offsets[pos] = static_cast<std::uint32_t>(entries_.size());
        for (const auto& [slot, x] : design_row(s, resp.person, alt, spec, resp.id)) {
          entries_.push_back({static_cast<std::uint32_t>(slot), x});
        }
        if (alt == s.chosen) compiled.chosen = pos;
        ++pos;
      }
      if (pos == 0) throw NoAvailableAlternative("respondent '" + resp.id + "' has an empty choice set");
      compiled.n_avail = pos;
      compiled.offsets[pos] = static_cast<std::uint32_t>(entries_.size());
      situations_.push_back(compiled);
    }
    respondents_.push_back(range);
  }
}

void SimulatedLikelihood::check(const ParameterVector& theta, const DrawSet& draws) const {
  if (theta.size() != n_slots()) {
    throw DimensionMismatch("parameter vector has " + std::to_string(theta.size()) +
                            " slots, model expects " + std::to_string(n_slots()));
  }
  if (draws.respondents() < respondents_.size() || draws.dims() < random_terms_.size()) {
    throw DimensionMismatch("draw set covers " + std::to_string(draws.respondents()) +
                            " respondents x " + std::to_string(draws.dims()) +
                            " dims; model needs " + std::to_string(respondents_.size()) + " x " +
                            std::to_string(random_terms_.size()));
  }
  if (draws.dims() != random_terms_.size()) {
    throw DimensionMismatch("draw set dimension " + std::to_string(draws.dims()) +
                            " differs from the number of random parameters " +
                            std::to_string(random_terms_.size()));
  }
}

double SimulatedLikelihood::respondent_eval(std::size_t n, std::span<const double> beta_mean,
                                            std::span<const double> abs_sd,
                                            std::span<const double> sd_sign,
                                            std::span<const double> draw_block,
                                            std::size_t n_draws, std::span<double> score,
                                            std::vector<double>& work, double* prob_out) const {
  const std::size_t k_dims = random_terms_.size();
  const std::size_t slots = n_slots();
  const bool want_grad = !score.empty();
  const auto range = respondents_[n];
  const bool log_path = range.count > kDirectProductMaxSituations;

  work.resize(2 * n_terms_ + slots + 2 * kNumAlternatives);
  double* beta = work.data();
  double* g = beta + n_terms_;
  double* acc = g + n_terms_;
  double* v = acc + slots;
  double* e = v + kNumAlternatives;
  if (want_grad) std::fill(acc, acc + slots, 0.0);

  double sum_w = 0.0;                                      // direct: sum of P_r
  double log_max = -std::numeric_limits<double>::infinity();  // log path: running max

  for (std::size_t r = 0; r < n_draws; ++r) {
    const double* z = draw_block.data() + r * k_dims;
    std::copy(beta_mean.begin(), beta_mean.end(), beta);
    for (std::size_t k = 0; k < k_dims; ++k) beta[random_terms_[k]] += abs_sd[k] * z[k];
    if (want_grad) std::fill(g, g + n_terms_, 0.0);

    double prod = 1.0;
    double log_prod = 0.0;
    for (std::size_t t = 0; t < range.count; ++t) {
      const Situation& s = situations_[range.first + t];
      double vmax = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < s.n_avail; ++a) {
        double u = 0.0;
        for (auto i = s.offsets[a]; i < s.offsets[a + 1]; ++i) u += beta[entries_[i].term] * entries_[i].x;
        v[a] = u;
        vmax = std::max(vmax, u);
      }
      double denom = 0.0;
      for (std::size_t a = 0; a < s.n_avail; ++a) {
        e[a] = std::exp(v[a] - vmax);
        denom += e[a];
      }
      if (log_path) {
        log_prod += (v[s.chosen] - vmax) - std::log(denom);
      } else {
        prod *= e[s.chosen] / denom;
      }
      if (want_grad) {
        for (std::size_t a = 0; a < s.n_avail; ++a) {
          const double p = e[a] / denom;
          for (auto i = s.offsets[a]; i < s.offsets[a + 1]; ++i) g[entries_[i].term] -= p * entries_[i].x;
        }
        for (auto i = s.offsets[s.chosen]; i < s.offsets[s.chosen + 1]; ++i) {
          g[entries_[i].term] += entries_[i].x;
        }
      }
    }

    double w;
    if (log_path) {
      if (log_prod > log_max) {
        const double rescale = std::exp(log_max - log_prod);
        sum_w *= rescale;
        if (want_grad) {
          for (std::size_t i = 0; i < slots; ++i) acc[i] *= rescale;
        }
        log_max = log_prod;
      }
      w = std::exp(log_prod - log_max);
    } else {
      w = prod;
    }
    sum_w += w;
    if (want_grad && w > 0.0) {
      for (std::size_t i = 0; i < n_terms_; ++i) acc[i] += w * g[i];
      for (std::size_t k = 0; k < k_dims; ++k) {
        acc[n_terms_ + k] += w * g[random_terms_[k]] * z[k] * sd_sign[k];
      }
    }
  }

  const double log_r = std::log(static_cast<double>(n_draws));
  double log_l;
  if (log_path) {
    log_l = log_max + std::log(sum_w) - log_r;
  } else {
    log_l = sum_w > 0.0 ? std::log(sum_w) - log_r : -std::numeric_limits<double>::infinity();
  }
  if (prob_out) *prob_out = std::exp(log_l);

  const bool floored = !(log_l >= kLogFloor);
  if (want_grad) {
    if (floored) {
      std::fill(score.begin(), score.end(), 0.0);
    } else {
      for (std::size_t i = 0; i < slots; ++i) score[i] = acc[i] / sum_w;
    }
  }
  return floored ? kLogFloor : log_l;
}

namespace {

struct Coefficients {
  std::vector<double> abs_sd;
  std::vector<double> sd_sign;
};

Coefficients split_sds(std::span<const double> sds) {
  Coefficients c;
  for (double s : sds) {
    c.abs_sd.push_back(std::abs(s));
    c.sd_sign.push_back(s < 0.0 ? -1.0 : 1.0);
  }
  return c;
}

}  // namespace

double SimulatedLikelihood::contributions(const ParameterVector& theta, const DrawSet& draws,
                                          std::span<double> respondent_ll,
                                          std::span<double> scores) const {
  check(theta, draws);
  const std::size_t slots = n_slots();
  const std::span<const double> all(theta.values);
  const auto means = all.first(n_terms_);
  const auto c = split_sds(all.subspan(n_terms_));
  std::vector<double> work;
  double total = 0.0;
  for (std::size_t n = 0; n < respondents_.size(); ++n) {
    std::span<double> row = scores.empty() ? std::span<double>{} : scores.subspan(n * slots, slots);
    const double ll = respondent_eval(n, means, c.abs_sd, c.sd_sign, draws.respondent_block(n),
                                      draws.draws(), row, work, nullptr);
    if (!respondent_ll.empty()) respondent_ll[n] = ll;
    total += ll;
  }
  return total;
}

double SimulatedLikelihood::loglik(const ParameterVector& theta, const DrawSet& draws) const {
  return contributions(theta, draws, {}, {});
}

double SimulatedLikelihood::loglik_grad(const ParameterVector& theta, const DrawSet& draws,
                                        std::span<double> grad) const {
  check(theta, draws);
  const std::size_t slots = n_slots();
  if (grad.size() != slots) throw DimensionMismatch("gradient buffer has the wrong size");
  const std::span<const double> all(theta.values);
  const auto means = all.first(n_terms_);
  const auto c = split_sds(all.subspan(n_terms_));
  std::vector<double> work;
  std::vector<double> score(slots);
  std::fill(grad.begin(), grad.end(), 0.0);
  double total = 0.0;
  for (std::size_t n = 0; n < respondents_.size(); ++n) {
    total += respondent_eval(n, means, c.abs_sd, c.sd_sign, draws.respondent_block(n),
                             draws.draws(), score, work, nullptr);
    for (std::size_t i = 0; i < slots; ++i) grad[i] += score[i];
  }
  return total;
}

double SimulatedLikelihood::respondent_prob(std::size_t n, const ParameterVector& theta,
                                            const DrawSet& draws) const {
  check(theta, draws);
  const std::span<const double> all(theta.values);
  const auto c = split_sds(all.subspan(n_terms_));
  std::vector<double> work;
  double prob = 0.0;
  respondent_eval(n, all.first(n_terms_), c.abs_sd, c.sd_sign, draws.respondent_block(n),
                  draws.draws(), {}, work, &prob);
  return prob;
}

}  // namespace mxl
