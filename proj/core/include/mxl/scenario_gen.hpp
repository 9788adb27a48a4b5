#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "mxl/model_spec.hpp"
#include "mxl/panel.hpp"

namespace mxl {

enum class TransitService : std::uint8_t { cta_rail, cta_metra, pace, cta_bus };

std::string_view to_string(TransitService s) noexcept;

/// Calibration targets and pivot-rule constants for the synthetic survey.
///
/// Category share vectors are in percent, in category order.
/// Whatever is left to 100% is an unreported category.
struct GeneratorConfig {
  // household size 1, 2, 3, 4, 5+
  std::vector<double> household_size = {28.53, 47.80, 13.66, 5.92, 3.49};
  // <15K, 15-35K, 35-50K, 50-75K, 75-100K, 100K+
  std::vector<double> income = {6.37, 8.95, 11.99, 12.90, 14.72, 30.80};
  // male, female
  std::vector<double> gender = {45.22, 54.02};
  // <=24, 25-34, 35-44, 45-54, 55-64, >=65
  std::vector<double> age = {17.60, 32.78, 19.58, 15.02, 11.99, 2.89};
  // white, african american, hispanic, asian, multiple, native american, other
  std::vector<double> race = {56.90, 16.54, 10.47, 8.50, 4.10, 0.61, 1.97};
  // <high school, high school, some college, vocational, associate, bachelor, graduate
  std::vector<double> education = {0.91, 5.31, 13.96, 1.06, 6.53, 37.94, 33.38};
  // full time, part time, other
  std::vector<double> employment = {72.08, 10.62, 17.30};

  double low_income_share = 0.091;  // household income under $30K
  double trust_share = 0.765;
  double rideshare_share = 0.339;
  double tech_access_share = 0.957;
  double vehicle_access_share = 0.60;

  double distance_mean = 16.23;  // miles, lognormal
  double distance_sd = 26.12;
  double cta_rail_share = 0.529;
  double metra_share = 0.267;
  double pace_share = 0.042;  // remainder is CTA bus
  double mandatory_share = 0.510;
  double shop_share = 0.033;
  double alone_share = 0.863;
  double retail_density_mean = 3.61;  // lognormal
  double retail_density_sd = 9.43;
  double ndnsty_ped_mean = 18.98;  // normal, floored
  double ndnsty_ped_sd = 9.46;
  double ndnsty_ped_floor = 0.5;

  double speed_min_mph = 20.0;
  double speed_max_mph = 35.0;
  double tnc_base_fare = 2.55;
  double tnc_per_mile = 2.00;
  double surge_min = 1.0;
  double surge_max = 2.0;
  double shuttle_wait_mean = 46.61;  // overall; bus mean is implied
  double shuttle_wait_mean_metra = 61.56;
  double shuttle_wait_mean_cta_rail = 35.87;
  double shuttle_wait_cv = 1.2;
  double tnc_wait_mean = 9.55;  // uniform with this mean and sd
  double tnc_wait_sd = 2.84;
  double taxi_wait_mean = 21.90;  // lognormal, clamped
  double taxi_wait_sd = 15.68;
  double taxi_wait_min = 1.0;
  double taxi_wait_max = 180.0;

  /// Mean shuttle wait for bus services implied by the overall and rail means.
  double shuttle_wait_mean_bus() const noexcept;
};

struct PersonProfile {
  bool millennial = false;
  bool senior = false;
  bool bachelor = false;
  bool graduate = false;
  bool full_time = false;
  bool low_income = false;
  bool trust = false;
  bool rideshare = false;
  bool tech_access = false;
  bool has_vehicle_access = false;

  // demographic strata: index into the GeneratorConfig share vectors,
  // -1 when unreported
  int household_size = -1;
  int income = -1;
  int gender = -1;
  int age = -1;
  int race = -1;
  int education = -1;
  int employment = -1;

  PersonCovariates covariates() const;
};

struct TripContext {
  double distance = 1.0;
  TransitService service = TransitService::cta_rail;
  bool mandatory = false;
  bool shop = false;
  bool alone = true;
  double retail_density = 0.0;
  double ndnsty_ped = 20.0;

  bool dist_m15() const noexcept { return distance > 15.0; }
  bool longdist_mndt() const noexcept { return dist_m15() && mandatory; }
  double ret_shop() const noexcept { return shop ? retail_density : 0.0; }
  bool ndnsty_ped_l10() const noexcept { return ndnsty_ped < 10.0; }

  /// Throws InvalidTrip.
  void validate() const;
};

/// Situation-level covariate layout written by the generator.
std::shared_ptr<const CovariateLayout> scenario_layout();

std::vector<PersonProfile> sample_population(std::size_t n, std::uint64_t seed,
                                             const GeneratorConfig& config = {});

TripContext sample_trip(std::uint64_t seed, const GeneratorConfig& config = {});

/// SP scenarios pivoting off one trip. Choices are left at the base
/// alternative; see simulate_choices. Throws InvalidTrip.
std::vector<ChoiceSituation> generate_scenarios(const PersonProfile& profile,
                                                const TripContext& trip,
                                                std::size_t n_scenarios, std::uint64_t seed,
                                                const GeneratorConfig& config = {});

/// Draws choices at theta_true: one coefficient realization per respondent,
/// iid Gumbel errors per (situation, alternative), argmax utility.
ChoicePanel simulate_choices(std::vector<Respondent> respondents, const ModelSpec& spec,
                             const ParameterVector& theta_true, std::uint64_t seed);

/// Population, trips, scenarios and choices in one call.
ChoicePanel generate_panel(std::size_t n_respondents, std::size_t n_situations,
                           const ModelSpec& spec, const ParameterVector& theta_true,
                           std::uint64_t seed, const GeneratorConfig& config = {});

}  // namespace mxl
