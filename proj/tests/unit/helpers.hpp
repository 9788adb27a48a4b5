#pragma once

// Test fixtures and independent reference computations.

#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mxl/covariates.hpp"
#include "mxl/model_spec.hpp"
#include "mxl/panel.hpp"

namespace mxt {

using mxl::AlternativeId;

inline std::shared_ptr<const mxl::CovariateLayout> make_layout(std::vector<std::string> names) {
  return std::make_shared<const mxl::CovariateLayout>(std::move(names));
}

/// Respondents with iid normal situation covariates X1..X3 and a TRUST person flag.
/// A third of respondents lack auto; choices are uniform over available alternatives.
inline mxl::ChoicePanel random_panel(std::size_t n_respondents, std::size_t n_situations,
                                     std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  auto layout = make_layout({"X1", "X2", "X3"});
  mxl::ChoicePanel panel;
  for (std::size_t n = 0; n < n_respondents; ++n) {
    mxl::Respondent r;
    r.id = "id" + std::to_string(n);
    r.person["TRUST"] = coin(gen) ? 1.0 : 0.0;
    const bool no_auto = n % 3 == 2;
    for (std::size_t t = 0; t < n_situations; ++t) {
      mxl::ChoiceSituation s(layout);
      s.situation_index = t;
      s.availability = mxl::apply_availability(!no_auto, mxl::kAllAvailable);
      for (auto alt : mxl::kAllAlternatives) {
        for (const auto& name : layout->names()) s.set_covariate(alt, name, normal(gen));
      }
      std::vector<AlternativeId> avail;
      for (auto alt : mxl::kAllAlternatives) {
        if (s.availability[mxl::index_of(alt)]) avail.push_back(alt);
      }
      s.chosen = avail[std::uniform_int_distribution<std::size_t>(0, avail.size() - 1)(gen)];
      r.situations.push_back(std::move(s));
    }
    panel.respondents.push_back(std::move(r));
  }
  return panel;
}

/// Constants on every non-base alternative plus three slopes; the first
/// `n_random` constants are random.
inline mxl::ModelSpec small_spec(std::size_t n_random) {
  using mxl::TermKind;
  std::vector<mxl::UtilityTerm> terms;
  const AlternativeId alts[] = {AlternativeId::shuttle_bus, AlternativeId::tnc,
                                AlternativeId::taxi,        AlternativeId::personal_auto,
                                AlternativeId::change_destination, AlternativeId::cancel_trip};
  std::size_t k = 0;
  for (auto alt : alts) {
    terms.push_back({alt, "CONSTANT", "asc_" + std::string(mxl::to_string(alt)),
                     k++ < n_random ? TermKind::random_normal : TermKind::fixed});
  }
  terms.push_back({AlternativeId::shuttle_bus, "X1", "b_shuttle_x1", TermKind::fixed});
  terms.push_back({AlternativeId::tnc, "X2", "b_tnc_x2", TermKind::fixed});
  terms.push_back({AlternativeId::taxi, "TRUST", "b_taxi_trust", TermKind::fixed});
  return mxl::ModelSpec(mxl::kBaseAlternative, std::move(terms));
}

/// Covariate value looked up without the library's design-row code.
inline double oracle_x(const mxl::Respondent& r, const mxl::ChoiceSituation& s,
                       const mxl::UtilityTerm& term) {
  if (term.covariate == "CONSTANT") return 1.0;
  if (auto v = s.covariate(term.alternative, term.covariate)) return *v;
  return r.person.at(term.covariate);
}

/// Closed-form MNL log-likelihood at the mean slots (sds ignored).
inline double mnl_loglik_oracle(const mxl::ChoicePanel& panel, const mxl::ModelSpec& spec,
                                const std::vector<double>& means) {
  long double total = 0.0L;
  for (const auto& r : panel.respondents) {
    for (const auto& s : r.situations) {
      double v[mxl::kNumAlternatives] = {};
      for (std::size_t i = 0; i < spec.n_terms(); ++i) {
        const auto& term = spec.terms()[i];
        v[mxl::index_of(term.alternative)] += means[i] * oracle_x(r, s, term);
      }
      double vmax = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < mxl::kNumAlternatives; ++j) {
        if (s.availability[j]) vmax = std::max(vmax, v[j]);
      }
      long double denom = 0.0L;
      for (std::size_t j = 0; j < mxl::kNumAlternatives; ++j) {
        if (s.availability[j]) denom += std::exp(static_cast<long double>(v[j] - vmax));
      }
      total += static_cast<long double>(v[mxl::index_of(s.chosen)] - vmax) - std::log(denom);
    }
  }
  return static_cast<double>(total);
}

/// MNL score: sum over situations of (y - p) x, per mean slot.
inline std::vector<double> mnl_score_oracle(const mxl::ChoicePanel& panel, const mxl::ModelSpec& spec,
                                            const std::vector<double>& means) {
  std::vector<double> g(spec.n_terms(), 0.0);
  for (const auto& r : panel.respondents) {
    for (const auto& s : r.situations) {
      double v[mxl::kNumAlternatives] = {};
      for (std::size_t i = 0; i < spec.n_terms(); ++i) {
        const auto& term = spec.terms()[i];
        v[mxl::index_of(term.alternative)] += means[i] * oracle_x(r, s, term);
      }
      double denom = 0.0;
      for (std::size_t j = 0; j < mxl::kNumAlternatives; ++j) {
        if (s.availability[j]) denom += std::exp(v[j]);
      }
      for (std::size_t i = 0; i < spec.n_terms(); ++i) {
        const auto& term = spec.terms()[i];
        const std::size_t j = mxl::index_of(term.alternative);
        if (!s.availability[j]) continue;
        const double p = std::exp(v[j]) / denom;
        const double y = s.chosen == term.alternative ? 1.0 : 0.0;
        g[i] += (y - p) * oracle_x(r, s, term);
      }
    }
  }
  return g;
}

inline mxl::ParameterVector random_theta(const mxl::ModelSpec& spec, std::mt19937_64& gen,
                                         double mean_scale = 0.5, double sd_lo = 0.1,
                                         double sd_hi = 1.0) {
  std::normal_distribution<double> normal(0.0, mean_scale);
  std::uniform_real_distribution<double> sd(sd_lo, sd_hi);
  mxl::ParameterVector theta{std::vector<double>(spec.n_slots())};
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = spec.is_sd_slot(i) ? sd(gen) : normal(gen);
  return theta;
}

}  // namespace mxt
