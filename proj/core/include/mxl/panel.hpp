#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mxl {

// The seven disruption responses. Order is canonical: it fixes column order
// in every table the library writes.
enum class AlternativeId : std::uint8_t {
  ask_ride,
  personal_auto,
  shuttle_bus,
  taxi,
  tnc,
  change_destination,
  cancel_trip,
};

inline constexpr std::size_t kNumAlternatives = 7;
inline constexpr AlternativeId kBaseAlternative = AlternativeId::ask_ride;

inline constexpr std::array<AlternativeId, kNumAlternatives> kAllAlternatives = {
    AlternativeId::ask_ride,    AlternativeId::personal_auto,      AlternativeId::shuttle_bus,
    AlternativeId::taxi,        AlternativeId::tnc,                AlternativeId::change_destination,
    AlternativeId::cancel_trip,
};

constexpr std::size_t index_of(AlternativeId alt) noexcept { return static_cast<std::size_t>(alt); }

std::string_view to_string(AlternativeId alt) noexcept;
std::optional<AlternativeId> parse_alternative(std::string_view id) noexcept;

using Availability = std::array<bool, kNumAlternatives>;

inline constexpr Availability kAllAvailable = {true, true, true, true, true, true, true};

/// Forces `personal_auto` off for respondents without vehicle access. Never turns it on.
Availability apply_availability(bool has_vehicle_access, const Availability& base) noexcept;

std::size_t count_available(const Availability& availability) noexcept;

/// Ordered set of situation-level covariate names shared by many situations.
class CovariateLayout {
 public:
  explicit CovariateLayout(std::vector<std::string> names);

  std::optional<std::size_t> find(std::string_view name) const;
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

using PersonCovariates = std::map<std::string, double, std::less<>>;

/// One stated-preference question answered by a respondent.
///
/// Covariates are stored densely as [alternative][covariate] against a
/// shared layout. A NaN cell means "absent".
struct ChoiceSituation {
  std::size_t situation_index = 0;
  Availability availability = kAllAvailable;
  std::shared_ptr<const CovariateLayout> layout;
  std::vector<double> values;
  AlternativeId chosen = kBaseAlternative;

  ChoiceSituation() = default;
  explicit ChoiceSituation(std::shared_ptr<const CovariateLayout> layout);

  std::optional<double> covariate(AlternativeId alt, std::string_view name) const;

  /// Throws std::out_of_range when the name is not in the layout.
  void set_covariate(AlternativeId alt, std::string_view name, double value);
  void set_for_all_alternatives(std::string_view name, double value);

  bool operator==(const ChoiceSituation& other) const;
};

struct Respondent {
  std::string id;
  PersonCovariates person;
  std::vector<ChoiceSituation> situations;

  bool operator==(const Respondent&) const = default;
};

struct ChoicePanel {
  std::vector<Respondent> respondents;

  std::size_t n_observations() const noexcept;
  bool operator==(const ChoicePanel&) const = default;
};

// Person-level covariate names. These are stored once per respondent.
const std::vector<std::string>& person_covariate_names();
bool is_person_covariate(std::string_view name);

enum class ViolationRule : std::uint8_t {
  duplicate_respondent,
  empty_respondent,
  situation_index_gap,
  chosen_unavailable,
  too_few_available,
  always_available,
  negative_attribute,
  person_covariate_shadowed,
};

std::string_view to_string(ViolationRule rule) noexcept;

struct Violation {
  std::size_t respondent = 0;  // position in the panel
  std::optional<std::size_t> situation;
  ViolationRule rule = ViolationRule::duplicate_respondent;
  std::string detail;

  bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

/// Checks every panel invariant. Violations are returned, never thrown,
/// ordered by (respondent, situation, rule).
ValidationReport validate_panel(const ChoicePanel& panel);

std::string format_violation(const ChoicePanel& panel, const Violation& violation);

}  // namespace mxl
