#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <set>

#include "helpers.hpp"
#include "mxl/errors.hpp"
#include "mxl/panel.hpp"

using namespace mxl;

namespace {

ChoicePanel one_situation_panel(AlternativeId chosen, Availability availability = kAllAvailable) {
  ChoiceSituation s(mxt::make_layout({"SHUTTLE_WAIT"}));
  s.availability = availability;
  s.chosen = chosen;
  s.set_for_all_alternatives("SHUTTLE_WAIT", 20.0);
  return ChoicePanel{{Respondent{"r1", {{"TRUST", 1.0}}, {s}}}};
}

}  // namespace

TEST_CASE("alternative set has seven unique lowercase ids") {
  CHECK(kAllAlternatives.size() == 7);
  std::set<std::string> ids;
  for (auto alt : kAllAlternatives) {
    const std::string id(to_string(alt));
    CHECK(std::all_of(id.begin(), id.end(), [](char c) { return !std::isupper(static_cast<unsigned char>(c)); }));
    ids.insert(id);
    CHECK(parse_alternative(id) == alt);
  }
  CHECK(ids.size() == 7);
  CHECK(kBaseAlternative == AlternativeId::ask_ride);
  CHECK(to_string(AlternativeId::personal_auto) == "auto");
  CHECK_FALSE(parse_alternative("bicycle").has_value());
}

TEST_CASE("apply_availability") {
  Availability expected = kAllAvailable;
  expected[index_of(AlternativeId::personal_auto)] = false;
  CHECK(apply_availability(false, kAllAvailable) == expected);
  CHECK(apply_availability(true, kAllAvailable) == kAllAvailable);
  CHECK(apply_availability(false, expected) == expected);
  // never switches auto on
  CHECK(apply_availability(true, expected) == expected);
}

TEST_CASE("apply_availability is idempotent over every base map") {
  for (unsigned mask = 0; mask < (1u << kNumAlternatives); ++mask) {
    Availability m{};
    for (std::size_t j = 0; j < kNumAlternatives; ++j) m[j] = (mask >> j) & 1u;
    for (bool access : {false, true}) {
      const auto once = apply_availability(access, m);
      CHECK(apply_availability(access, once) == once);
      for (std::size_t j = 0; j < kNumAlternatives; ++j) {
        if (j != index_of(AlternativeId::personal_auto)) CHECK(once[j] == m[j]);
      }
    }
  }
}

TEST_CASE("count_available") {
  CHECK(count_available(kAllAvailable) == 7);
  CHECK(count_available(apply_availability(false, kAllAvailable)) == 6);
}

TEST_CASE("covariate layout rejects duplicate names") {
  CHECK_THROWS_AS(CovariateLayout({"A", "A"}), std::invalid_argument);
  const CovariateLayout layout({"A", "B"});
  CHECK(layout.find("B") == 1u);
  CHECK_FALSE(layout.find("C").has_value());
}

TEST_CASE("situation covariate access") {
  ChoiceSituation s(mxt::make_layout({"A", "B"}));
  CHECK_FALSE(s.covariate(AlternativeId::taxi, "A").has_value());
  s.set_covariate(AlternativeId::taxi, "A", 2.5);
  CHECK(s.covariate(AlternativeId::taxi, "A") == 2.5);
  CHECK_FALSE(s.covariate(AlternativeId::tnc, "A").has_value());
  CHECK_FALSE(s.covariate(AlternativeId::taxi, "Z").has_value());
  CHECK_THROWS_AS(s.set_covariate(AlternativeId::taxi, "Z", 1.0), std::out_of_range);
  s.set_for_all_alternatives("B", -1.0);
  for (auto alt : kAllAlternatives) CHECK(s.covariate(alt, "B") == -1.0);
}

TEST_CASE("validate_panel: well-formed panel has an empty report") {
  CHECK(validate_panel(one_situation_panel(AlternativeId::shuttle_bus)).empty());
  CHECK(validate_panel(mxt::random_panel(30, 4, 1)).empty());
}

TEST_CASE("validate_panel: chosen auto while auto unavailable") {
  const auto panel = one_situation_panel(AlternativeId::personal_auto, apply_availability(false, kAllAvailable));
  const auto report = validate_panel(panel);
  REQUIRE(report.size() == 1);
  CHECK(report[0].rule == ViolationRule::chosen_unavailable);
  CHECK(to_string(report[0].rule) == "chosen-unavailable");
  CHECK(report[0].situation == 0u);
  CHECK(format_violation(panel, report[0]).find("chosen-unavailable: respondent 'r1', situation 0") == 0);
}

TEST_CASE("validate_panel: duplicated respondent id") {
  auto panel = one_situation_panel(AlternativeId::tnc);
  panel.respondents.push_back(panel.respondents[0]);
  const auto report = validate_panel(panel);
  REQUIRE(report.size() == 1);
  CHECK(report[0].rule == ViolationRule::duplicate_respondent);
  CHECK(report[0].respondent == 1);
  CHECK_FALSE(report[0].situation.has_value());
}

TEST_CASE("validate_panel: every rule fires and the report is ordered") {
  auto panel = mxt::random_panel(3, 3, 9);
  panel.respondents.push_back(Respondent{"empty", {}, {}});  // empty-respondent
  auto& r0 = panel.respondents[0];
  r0.situations[2].situation_index = 7;                                          // gap
  r0.situations[1].availability[index_of(AlternativeId::taxi)] = false;          // always-available
  r0.situations[1].chosen = AlternativeId::taxi;                                 // chosen-unavailable
  auto& r1 = panel.respondents[1];
  r1.situations[0].availability.fill(false);
  r1.situations[0].availability[index_of(AlternativeId::tnc)] = true;
  r1.situations[0].chosen = AlternativeId::tnc;  // too-few + always-available x5
  auto layout = mxt::make_layout({"TNC_WAIT", "TRUST"});
  ChoiceSituation s(layout);
  s.set_for_all_alternatives("TNC_WAIT", 3.0);
  s.set_covariate(AlternativeId::tnc, "TNC_WAIT", -1.0);  // negative-attribute
  s.set_for_all_alternatives("TRUST", 1.0);               // person-covariate-shadowed
  panel.respondents[2].situations[1] = s;
  panel.respondents[2].situations[1].situation_index = 1;
  panel.respondents.push_back(Respondent{"empty", {}, {}});  // duplicate-respondent

  const auto report = validate_panel(panel);
  std::set<ViolationRule> rules;
  for (const auto& v : report) rules.insert(v.rule);
  CHECK(rules.size() == 8);

  for (std::size_t i = 1; i < report.size(); ++i) {
    const auto& a = report[i - 1];
    const auto& b = report[i];
    const bool ordered = a.respondent < b.respondent ||
                         (a.respondent == b.respondent &&
                          (a.situation < b.situation || (a.situation == b.situation && a.rule <= b.rule)));
    CHECK(ordered);
  }
  // pure and idempotent
  CHECK(validate_panel(panel) == report);
}

TEST_CASE("n_observations sums situations") {
  CHECK(mxt::random_panel(5, 3, 2).n_observations() == 15);
  CHECK(ChoicePanel{}.n_observations() == 0);
}

TEST_CASE("person covariate names") {
  CHECK(person_covariate_names().size() == 9);
  CHECK(is_person_covariate("SENIOR"));
  CHECK_FALSE(is_person_covariate("TNC_WAIT"));
}

TEST_CASE("situation equality treats absent cells as equal") {
  auto a = one_situation_panel(AlternativeId::tnc);
  auto b = one_situation_panel(AlternativeId::tnc);
  CHECK(a == b);
  b.respondents[0].situations[0].set_covariate(AlternativeId::tnc, "SHUTTLE_WAIT", 21.0);
  CHECK_FALSE(a == b);
}
