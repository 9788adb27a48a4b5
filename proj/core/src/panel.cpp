#include "mxl/panel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "mxl/covariates.hpp"

namespace mxl {
namespace {

constexpr std::array<std::string_view, kNumAlternatives> kAlternativeIds = {
    "ask_ride", "auto", "shuttle_bus", "taxi", "tnc", "change_destination", "cancel_trip",
};

bool is_time_or_cost(std::string_view name) {
  return name.find("WAIT") != std::string_view::npos ||
         name.find("TIME") != std::string_view::npos ||
         name.find("COST") != std::string_view::npos;
}

bool same_cell(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

}  // namespace

std::string_view to_string(AlternativeId alt) noexcept { return kAlternativeIds[index_of(alt)]; }

std::optional<AlternativeId> parse_alternative(std::string_view id) noexcept {
  for (std::size_t i = 0; i < kNumAlternatives; ++i) {
    if (kAlternativeIds[i] == id) return kAllAlternatives[i];
  }
  return std::nullopt;
}

Availability apply_availability(bool has_vehicle_access, const Availability& base) noexcept {
  Availability out = base;
  if (!has_vehicle_access) out[index_of(AlternativeId::personal_auto)] = false;
  return out;
}

std::size_t count_available(const Availability& availability) noexcept {
  return static_cast<std::size_t>(std::count(availability.begin(), availability.end(), true));
}

CovariateLayout::CovariateLayout(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw std::invalid_argument("duplicate covariate name '" + names_[i] + "'");
    }
  }
}

std::optional<std::size_t> CovariateLayout::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ChoiceSituation::ChoiceSituation(std::shared_ptr<const CovariateLayout> l)
    : layout(std::move(l)),
      values(kNumAlternatives * (layout ? layout->size() : 0),
             std::numeric_limits<double>::quiet_NaN()) {}

std::optional<double> ChoiceSituation::covariate(AlternativeId alt, std::string_view name) const {
  if (!layout) return std::nullopt;
  auto idx = layout->find(name);
  if (!idx) return std::nullopt;
  double v = values[index_of(alt) * layout->size() + *idx];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

void ChoiceSituation::set_covariate(AlternativeId alt, std::string_view name, double value) {
  auto idx = layout ? layout->find(name) : std::nullopt;
  if (!idx) throw std::out_of_range("covariate '" + std::string(name) + "' not in layout");
  values[index_of(alt) * layout->size() + *idx] = value;
}

void ChoiceSituation::set_for_all_alternatives(std::string_view name, double value) {
  for (auto alt : kAllAlternatives) set_covariate(alt, name, value);
}

bool ChoiceSituation::operator==(const ChoiceSituation& other) const {
  if (situation_index != other.situation_index || availability != other.availability ||
      chosen != other.chosen || values.size() != other.values.size()) {
    return false;
  }
  const bool has_layout = layout && layout->size() > 0;
  const bool other_has_layout = other.layout && other.layout->size() > 0;
  if (has_layout != other_has_layout) return false;
  if (has_layout && layout->names() != other.layout->names()) return false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!same_cell(values[i], other.values[i])) return false;
  }
  return true;
}

std::size_t ChoicePanel::n_observations() const noexcept {
  std::size_t n = 0;
  for (const auto& r : respondents) n += r.situations.size();
  return n;
}

const std::vector<std::string>& person_covariate_names() {
  static const std::vector<std::string> names = {
      std::string(cov::MILLENNIAL), std::string(cov::SENIOR),    std::string(cov::BACHELOR),
      std::string(cov::GRADUATE),   std::string(cov::FULL_TIME), std::string(cov::LOW_INCOME),
      std::string(cov::TRUST),      std::string(cov::RIDESHARE), std::string(cov::TECH_ACCESS),
  };
  return names;
}

bool is_person_covariate(std::string_view name) {
  const auto& names = person_covariate_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::string_view to_string(ViolationRule rule) noexcept {
  switch (rule) {
    case ViolationRule::duplicate_respondent: return "duplicate-respondent";
    case ViolationRule::empty_respondent: return "empty-respondent";
    case ViolationRule::situation_index_gap: return "situation-index-gap";
    case ViolationRule::chosen_unavailable: return "chosen-unavailable";
    case ViolationRule::too_few_available: return "too-few-available";
    case ViolationRule::always_available: return "always-available";
    case ViolationRule::negative_attribute: return "negative-attribute";
    case ViolationRule::person_covariate_shadowed: return "person-covariate-shadowed";
  }
  return "unknown";
}

ValidationReport validate_panel(const ChoicePanel& panel) {
  ValidationReport report;
  std::unordered_set<std::string> seen;

  for (std::size_t n = 0; n < panel.respondents.size(); ++n) {
    const auto& resp = panel.respondents[n];
    if (!seen.insert(resp.id).second) {
      report.push_back({n, std::nullopt, ViolationRule::duplicate_respondent, resp.id});
    }
    if (resp.situations.empty()) {
      report.push_back({n, std::nullopt, ViolationRule::empty_respondent, resp.id});
    }

    for (std::size_t t = 0; t < resp.situations.size(); ++t) {
      const auto& s = resp.situations[t];
      if (s.situation_index != t) {
        report.push_back({n, t, ViolationRule::situation_index_gap,
                          "expected index " + std::to_string(t) + ", found " +
                              std::to_string(s.situation_index)});
      }
      if (!s.availability[index_of(s.chosen)]) {
        report.push_back({n, t, ViolationRule::chosen_unavailable, std::string(to_string(s.chosen))});
      }
      if (count_available(s.availability) < 2) {
        report.push_back({n, t, ViolationRule::too_few_available,
                          std::to_string(count_available(s.availability)) + " available"});
      }
      for (auto alt : kAllAlternatives) {
        if (alt != AlternativeId::personal_auto && !s.availability[index_of(alt)]) {
          report.push_back({n, t, ViolationRule::always_available, std::string(to_string(alt))});
        }
      }
      if (s.layout) {
        const auto& names = s.layout->names();
        const std::size_t k = names.size();
        for (std::size_t c = 0; c < k; ++c) {
          if (is_time_or_cost(names[c])) {
            for (auto alt : kAllAlternatives) {
              double v = s.values[index_of(alt) * k + c];
              if (v < 0.0) {
                report.push_back({n, t, ViolationRule::negative_attribute,
                                  names[c] + " for " + std::string(to_string(alt))});
              }
            }
          }
          if (is_person_covariate(names[c])) {
            report.push_back({n, t, ViolationRule::person_covariate_shadowed, names[c]});
          }
        }
      }
    }
  }

  std::stable_sort(report.begin(), report.end(), [](const Violation& a, const Violation& b) {
    if (a.respondent != b.respondent) return a.respondent < b.respondent;
    // respondent-level violations (no situation) sort first
    if (a.situation != b.situation) return a.situation < b.situation;
    return a.rule < b.rule;
  });
  return report;
}

std::string format_violation(const ChoicePanel& panel, const Violation& v) {
  std::string out = std::string(to_string(v.rule)) + ": respondent ";
  if (v.respondent < panel.respondents.size()) {
    out += "'" + panel.respondents[v.respondent].id + "'";
  } else {
    out += "#" + std::to_string(v.respondent);
  }
  if (v.situation) out += ", situation " + std::to_string(*v.situation);
  if (!v.detail.empty()) out += " (" + v.detail + ")";
  return out;
}

}  // namespace mxl
