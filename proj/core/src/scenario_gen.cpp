#include "mxl/scenario_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mxl/covariates.hpp"
#include "mxl/errors.hpp"
#include "mxl/random.hpp"

namespace mxl {
namespace {

// stream tags
enum : std::uint64_t {
  kPopulation = 1,
  kTrip = 2,
  kScenario = 3,
  kCoefficient = 4,
  kGumbel = 5,
  kRespondent = 6,
};

// field tags within a stream
enum : std::uint64_t {
  kHousehold,
  kIncome,
  kLowIncomeSplit,
  kGender,
  kAge,
  kRace,
  kEducation,
  kEmployment,
  kTrust,
  kRideshare,
  kTechAccess,
  kVehicle,
  kDistance,
  kService,
  kMandatory,
  kShop,
  kAlone,
  kRetail,
  kPedestrian,
  kSpeed,
  kSurge,
  kShuttleWait,
  kTncWait,
  kTaxiWait,
};

// Category index for u in (0,1); -1 when u falls in the unreported remainder.
int pick_category(const std::vector<double>& percent, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < percent.size(); ++i) {
    acc += percent[i] / 100.0;
    if (u < acc) return static_cast<int>(i);
  }
  return -1;
}

struct LogNormal {
  double mu;
  double sigma;
};

LogNormal lognormal_from_moments(double mean, double sd) {
  const double s2 = std::log1p((sd / mean) * (sd / mean));
  return {std::log(mean) - 0.5 * s2, std::sqrt(s2)};
}

double lognormal(const CounterRng& rng, std::initializer_list<std::uint64_t> key, LogNormal p) {
  return std::exp(p.mu + p.sigma * rng.normal(key));
}

}  // namespace

std::string_view to_string(TransitService s) noexcept {
  switch (s) {
    case TransitService::cta_rail: return "CTA_RAIL";
    case TransitService::cta_metra: return "CTA_METRA";
    case TransitService::pace: return "PACE";
    case TransitService::cta_bus: return "CTA_BUS";
  }
  return "unknown";
}

double GeneratorConfig::shuttle_wait_mean_bus() const noexcept {
  const double bus_share = 1.0 - cta_rail_share - metra_share;
  return (shuttle_wait_mean - cta_rail_share * shuttle_wait_mean_cta_rail -
          metra_share * shuttle_wait_mean_metra) /
         bus_share;
}

PersonCovariates PersonProfile::covariates() const {
  auto b = [](bool v) { return v ? 1.0 : 0.0; };
  return {
      {std::string(cov::MILLENNIAL), b(millennial)}, {std::string(cov::SENIOR), b(senior)},
      {std::string(cov::BACHELOR), b(bachelor)},     {std::string(cov::GRADUATE), b(graduate)},
      {std::string(cov::FULL_TIME), b(full_time)},   {std::string(cov::LOW_INCOME), b(low_income)},
      {std::string(cov::TRUST), b(trust)},           {std::string(cov::RIDESHARE), b(rideshare)},
      {std::string(cov::TECH_ACCESS), b(tech_access)},
  };
}

void TripContext::validate() const {
  if (!(distance > 0.0) || !std::isfinite(distance)) throw InvalidTrip("trip distance must be > 0");
  if (mandatory && shop) throw InvalidTrip("a trip cannot be both mandatory and shopping");
  if (!(retail_density >= 0.0) || !(ndnsty_ped >= 0.0)) {
    throw InvalidTrip("block-group densities must be non-negative");
  }
}

std::shared_ptr<const CovariateLayout> scenario_layout() {
  static const auto layout = std::make_shared<const CovariateLayout>(std::vector<std::string>{
      std::string(cov::DISTANCE),       std::string(cov::DIST_M15),
      std::string(cov::ALONE),          std::string(cov::MANDATORY),
      std::string(cov::SHOP),           std::string(cov::CTA_RAIL),
      std::string(cov::CTA_METRA),      std::string(cov::PACE),
      std::string(cov::SHUTTLE_WAIT),   std::string(cov::TNC_WAIT),
      std::string(cov::TNC_COST),       std::string(cov::DRIVE_TIME),
      std::string(cov::TAXI_WAIT),      std::string(cov::LONGDIST_MNDT),
      std::string(cov::SHUTTLE_WAIT_METRA), std::string(cov::SHUTTLE_WAIT_CTA_RAIL),
      std::string(cov::RETAIL_DENSITY), std::string(cov::RET_SHOP),
      std::string(cov::NDNSTY_PED),     std::string(cov::NDNSTY_PED_L10),
  });
  return layout;
}

std::vector<PersonProfile> sample_population(std::size_t n, std::uint64_t seed,
                                             const GeneratorConfig& config) {
  const CounterRng rng = CounterRng(seed).fork(kPopulation);

  // LOW_INCOME covers all of the lowest bracket and the share q of the next
  // one that lands on the target indicator mean.
  const double lowest = config.income.size() > 0 ? config.income[0] / 100.0 : 0.0;
  const double next = config.income.size() > 1 ? config.income[1] / 100.0 : 0.0;
  const double split = next > 0.0 ? std::clamp((config.low_income_share - lowest) / next, 0.0, 1.0) : 0.0;

  std::vector<PersonProfile> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    PersonProfile& p = out[i];
    p.household_size = pick_category(config.household_size, rng.uniform({i, kHousehold}));
    p.income = pick_category(config.income, rng.uniform({i, kIncome}));
    p.gender = pick_category(config.gender, rng.uniform({i, kGender}));
    p.age = pick_category(config.age, rng.uniform({i, kAge}));
    p.race = pick_category(config.race, rng.uniform({i, kRace}));
    p.education = pick_category(config.education, rng.uniform({i, kEducation}));
    p.employment = pick_category(config.employment, rng.uniform({i, kEmployment}));

    p.millennial = p.age == 1;
    p.senior = p.age == 5;
    p.bachelor = p.education == 5;
    p.graduate = p.education == 6;
    p.full_time = p.employment == 0;
    p.low_income = p.income == 0 || (p.income == 1 && rng.uniform({i, kLowIncomeSplit}) < split);
    p.trust = rng.bernoulli({i, kTrust}, config.trust_share);
    p.rideshare = rng.bernoulli({i, kRideshare}, config.rideshare_share);
    p.tech_access = rng.bernoulli({i, kTechAccess}, config.tech_access_share);
    p.has_vehicle_access = rng.bernoulli({i, kVehicle}, config.vehicle_access_share);
  }
  return out;
}

TripContext sample_trip(std::uint64_t seed, const GeneratorConfig& config) {
  const CounterRng rng = CounterRng(seed).fork(kTrip);
  TripContext trip;
  trip.distance = lognormal(rng, {kDistance}, lognormal_from_moments(config.distance_mean, config.distance_sd));

  const double u = rng.uniform({kService});
  if (u < config.cta_rail_share) {
    trip.service = TransitService::cta_rail;
  } else if (u < config.cta_rail_share + config.metra_share) {
    trip.service = TransitService::cta_metra;
  } else if (u < config.cta_rail_share + config.metra_share + config.pace_share) {
    trip.service = TransitService::pace;
  } else {
    trip.service = TransitService::cta_bus;
  }

  trip.mandatory = rng.bernoulli({kMandatory}, config.mandatory_share);
  // shopping only among non-mandatory trips, scaled to hit the overall share
  const double shop_given_other = config.shop_share / std::max(1e-12, 1.0 - config.mandatory_share);
  trip.shop = !trip.mandatory && rng.bernoulli({kShop}, shop_given_other);
  trip.alone = rng.bernoulli({kAlone}, config.alone_share);
  trip.retail_density = lognormal(rng, {kRetail},
                                  lognormal_from_moments(config.retail_density_mean, config.retail_density_sd));
  trip.ndnsty_ped = std::max(config.ndnsty_ped_floor,
                             config.ndnsty_ped_mean + config.ndnsty_ped_sd * rng.normal({kPedestrian}));
  return trip;
}

std::vector<ChoiceSituation> generate_scenarios(const PersonProfile& profile,
                                                const TripContext& trip,
                                                std::size_t n_scenarios, std::uint64_t seed,
                                                const GeneratorConfig& config) {
  trip.validate();
  const CounterRng rng = CounterRng(seed).fork(kScenario);
  const auto layout = scenario_layout();

  double shuttle_mean = config.shuttle_wait_mean_bus();
  if (trip.service == TransitService::cta_metra) shuttle_mean = config.shuttle_wait_mean_metra;
  if (trip.service == TransitService::cta_rail) shuttle_mean = config.shuttle_wait_mean_cta_rail;
  const LogNormal shuttle = lognormal_from_moments(shuttle_mean, config.shuttle_wait_cv * shuttle_mean);
  const LogNormal taxi = lognormal_from_moments(config.taxi_wait_mean, config.taxi_wait_sd);
  // uniform with the target mean and sd
  const double tnc_half_width = std::sqrt(3.0) * config.tnc_wait_sd;

  const Availability availability = apply_availability(profile.has_vehicle_access, kAllAvailable);
  const double is_metra = trip.service == TransitService::cta_metra ? 1.0 : 0.0;
  const double is_rail = trip.service == TransitService::cta_rail ? 1.0 : 0.0;

  std::vector<ChoiceSituation> out;
  out.reserve(n_scenarios);
  for (std::size_t t = 0; t < n_scenarios; ++t) {
    const double speed = rng.uniform({t, kSpeed}, config.speed_min_mph, config.speed_max_mph);
    const double surge = rng.uniform({t, kSurge}, config.surge_min, config.surge_max);
    const double drive_time = trip.distance / speed * 60.0;
    const double tnc_cost = config.tnc_base_fare + config.tnc_per_mile * trip.distance * surge;
    const double shuttle_wait = lognormal(rng, {t, kShuttleWait}, shuttle);
    const double tnc_wait = rng.uniform({t, kTncWait}, config.tnc_wait_mean - tnc_half_width,
                                        config.tnc_wait_mean + tnc_half_width);
    const double taxi_wait =
        std::clamp(lognormal(rng, {t, kTaxiWait}, taxi), config.taxi_wait_min, config.taxi_wait_max);

    ChoiceSituation s(layout);
    s.situation_index = t;
    s.availability = availability;
    s.set_for_all_alternatives(cov::DISTANCE, trip.distance);
    s.set_for_all_alternatives(cov::DIST_M15, trip.dist_m15() ? 1.0 : 0.0);
    s.set_for_all_alternatives(cov::ALONE, trip.alone ? 1.0 : 0.0);
    s.set_for_all_alternatives(cov::MANDATORY, trip.mandatory ? 1.0 : 0.0);
    s.set_for_all_alternatives(cov::SHOP, trip.shop ? 1.0 : 0.0);
    s.set_for_all_alternatives(cov::CTA_RAIL, is_rail);
    s.set_for_all_alternatives(cov::CTA_METRA, is_metra);
    s.set_for_all_alternatives(cov::PACE, trip.service == TransitService::pace ? 1.0 : 0.0);
    s.set_for_all_alternatives(cov::SHUTTLE_WAIT, shuttle_wait);
    s.set_for_all_alternatives(cov::TNC_WAIT, tnc_wait);
    s.set_for_all_alternatives(cov::TNC_COST, tnc_cost);
    s.set_for_all_alternatives(cov::DRIVE_TIME, drive_time);
    s.set_for_all_alternatives(cov::TAXI_WAIT, taxi_wait);
    s.set_for_all_alternatives(cov::LONGDIST_MNDT, trip.longdist_mndt() ? 1.0 : 0.0);
    s.set_for_all_alternatives(cov::SHUTTLE_WAIT_METRA, shuttle_wait * is_metra);
    s.set_for_all_alternatives(cov::SHUTTLE_WAIT_CTA_RAIL, shuttle_wait * is_rail);
    s.set_for_all_alternatives(cov::RETAIL_DENSITY, trip.retail_density);
    s.set_for_all_alternatives(cov::RET_SHOP, trip.ret_shop());
    s.set_for_all_alternatives(cov::NDNSTY_PED, trip.ndnsty_ped);
    s.set_for_all_alternatives(cov::NDNSTY_PED_L10, trip.ndnsty_ped_l10() ? 1.0 : 0.0);
    out.push_back(std::move(s));
  }
  return out;
}

ChoicePanel simulate_choices(std::vector<Respondent> respondents, const ModelSpec& spec,
                             const ParameterVector& theta_true, std::uint64_t seed) {
  spec.check(theta_true);
  const CounterRng coef_rng = CounterRng(seed).fork(kCoefficient);
  const CounterRng gumbel_rng = CounterRng(seed).fork(kGumbel);
  const auto means = spec.means(theta_true);
  const auto sds = spec.sds(theta_true);

  std::vector<double> beta(spec.n_terms());
  for (std::size_t n = 0; n < respondents.size(); ++n) {
    auto& resp = respondents[n];
    std::copy(means.begin(), means.end(), beta.begin());
    for (std::size_t k = 0; k < spec.n_random(); ++k) {
      beta[spec.random_terms()[k]] += std::abs(sds[k]) * coef_rng.normal({n, k});
    }
    for (std::size_t t = 0; t < resp.situations.size(); ++t) {
      auto& s = resp.situations[t];
      double best = -std::numeric_limits<double>::infinity();
      for (auto alt : kAllAlternatives) {
        if (!s.availability[index_of(alt)]) continue;
        double u = gumbel_rng.gumbel({n, t, index_of(alt)});
        for (const auto& [slot, x] : design_row(s, resp.person, alt, spec, resp.id)) u += beta[slot] * x;
        if (u > best) {
          best = u;
          s.chosen = alt;
        }
      }
    }
  }
  return ChoicePanel{std::move(respondents)};
}

ChoicePanel generate_panel(std::size_t n_respondents, std::size_t n_situations,
                           const ModelSpec& spec, const ParameterVector& theta_true,
                           std::uint64_t seed, const GeneratorConfig& config) {
  const auto people = sample_population(n_respondents, seed, config);
  const CounterRng per_respondent = CounterRng(seed).fork(kRespondent);
  std::vector<Respondent> respondents;
  respondents.reserve(n_respondents);
  for (std::size_t n = 0; n < n_respondents; ++n) {
    char id[24];
    std::snprintf(id, sizeof id, "r%06zu", n + 1);
    const std::uint64_t trip_seed = per_respondent.bits({n, 0});
    const std::uint64_t scenario_seed = per_respondent.bits({n, 1});
    const TripContext trip = sample_trip(trip_seed, config);
    respondents.push_back(Respondent{
        id, people[n].covariates(),
        generate_scenarios(people[n], trip, n_situations, scenario_seed, config)});
  }
  return simulate_choices(std::move(respondents), spec, theta_true, seed);
}

}  // namespace mxl
