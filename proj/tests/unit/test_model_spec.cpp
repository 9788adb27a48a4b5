#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "helpers.hpp"
#include "mxl/errors.hpp"
#include "mxl/model_spec.hpp"

using namespace mxl;
using A = AlternativeId;

namespace {

double slot_value(const ReferenceModel& ref, std::string_view name) {
  const auto slot = ref.spec.find_slot(name);
  REQUIRE(slot.has_value());
  return ref.theta[*slot];
}

double row_value(const SparseRow& row, std::size_t slot) {
  for (const auto& [s, x] : row) {
    if (s == slot) return x;
  }
  return 0.0;
}

}  // namespace

TEST_CASE("reference model layout") {
  const auto ref = reference_spec();
  CHECK(ref.spec.n_terms() == 33);
  CHECK(ref.spec.n_random() == 9);
  CHECK(ref.spec.n_slots() == 42);
  CHECK(ref.theta.size() == 42);
  CHECK(ref.reference_p_values.size() == 42);
  CHECK(ref.spec.base_alternative() == A::ask_ride);
}

TEST_CASE("reference model values") {
  const auto ref = reference_spec();
  CHECK(slot_value(ref, "asc_shuttle_bus") == 3.210);
  CHECK(slot_value(ref, "sd_asc_shuttle_bus") == 2.344);
  CHECK(slot_value(ref, "b_tnc_cost") == -0.016);
  CHECK(slot_value(ref, "b_cancel_mandatory") == -0.751);
  CHECK(slot_value(ref, "b_shuttle_wait") == -0.015);
  CHECK(slot_value(ref, "sd_b_shuttle_wait_cta_rail") == 0.082);
  CHECK(slot_value(ref, "sd_b_change_rideshare") == 3.101);

  const auto cost = ref.spec.find_term("b_tnc_cost");
  REQUIRE(cost);
  CHECK(ref.spec.terms()[*cost].kind == TermKind::fixed);
  CHECK(ref.spec.terms()[*ref.spec.find_term("b_cancel_mandatory")].kind == TermKind::fixed);
  CHECK(ref.reference_p_values[*ref.spec.find_slot("asc_taxi")] == 0.0367);
}

TEST_CASE("reference model is constant across calls") {
  const auto a = reference_spec();
  const auto b = reference_spec();
  CHECK(a.spec == b.spec);
  CHECK(a.theta == b.theta);
  CHECK(a.reference_p_values == b.reference_p_values);
}

TEST_CASE("each reference term is a distinct (alternative, covariate) pair") {
  const auto ref = reference_spec();
  std::set<std::pair<A, std::string>> pairs;
  for (const auto& t : ref.spec.terms()) CHECK(pairs.insert({t.alternative, t.covariate}).second);
  CHECK(pairs.size() == ref.spec.n_terms());
}

TEST_CASE("spec construction errors") {
  CHECK_THROWS_AS(ModelSpec(A::ask_ride, {{A::ask_ride, "CONSTANT", "asc_ask", TermKind::fixed}}), SpecError);
  CHECK_THROWS_AS(ModelSpec(A::ask_ride, {{A::tnc, "X", "b", TermKind::fixed}, {A::taxi, "Y", "b", TermKind::fixed}}),
                  SpecError);
  CHECK_THROWS_AS(ModelSpec(A::ask_ride, {{A::tnc, "", "b", TermKind::fixed}}), SpecError);
  CHECK_THROWS_AS(ModelSpec(A::ask_ride, {{A::tnc, "X", "", TermKind::fixed}}), SpecError);
  // a constant on a non-base alternative is fine when the base changes
  CHECK_NOTHROW(ModelSpec(A::tnc, {{A::ask_ride, "CONSTANT", "asc_ask", TermKind::fixed}}));
}

TEST_CASE("slot layout") {
  const ModelSpec spec(A::ask_ride, {{A::tnc, "CONSTANT", "asc_tnc", TermKind::random_normal},
                                     {A::tnc, "X", "b_x", TermKind::fixed},
                                     {A::taxi, "Y", "b_y", TermKind::random_normal}});
  CHECK(spec.n_slots() == 5);
  CHECK(spec.slot_names() == std::vector<std::string>{"asc_tnc", "b_x", "b_y", "sd_asc_tnc", "sd_b_y"});
  CHECK(spec.random_terms() == std::vector<std::size_t>{0, 2});
  CHECK(spec.sd_slot(1) == 4);
  CHECK(spec.is_sd_slot(3));
  CHECK_FALSE(spec.is_sd_slot(2));
  CHECK(spec.random_dim(2) == 1u);
  CHECK_FALSE(spec.random_dim(1).has_value());
  CHECK(spec.find_slot("sd_b_y") == 4u);
  CHECK(spec.uses_covariate("Y"));
  CHECK_FALSE(spec.uses_covariate("Z"));

  const auto fixed = spec.with_all_fixed();
  CHECK(fixed.n_random() == 0);
  CHECK(fixed.n_slots() == 3);

  ParameterVector theta{{1, 2, 3, 4, 5}};
  CHECK(std::vector<double>(spec.means(theta).begin(), spec.means(theta).end()) == std::vector<double>{1, 2, 3});
  CHECK(std::vector<double>(spec.sds(theta).begin(), spec.sds(theta).end()) == std::vector<double>{4, 5});
  CHECK_THROWS_AS(spec.check(ParameterVector{{1, 2}}), DimensionMismatch);
}

TEST_CASE("term kind text") {
  CHECK(parse_term_kind("fixed") == TermKind::fixed);
  CHECK(parse_term_kind("random_normal") == TermKind::random_normal);
  CHECK_FALSE(parse_term_kind("lognormal").has_value());
  CHECK(to_string(TermKind::random_normal) == "random_normal");
}

TEST_CASE("design_row examples") {
  const auto ref = reference_spec();
  const auto& spec = ref.spec;
  ChoiceSituation s(mxt::make_layout({"SHUTTLE_WAIT", "TNC_WAIT", "ALONE", "SHUTTLE_WAIT_METRA",
                                      "SHUTTLE_WAIT_CTA_RAIL", "RET_SHOP", "NDNSTY_PED_L10", "PACE",
                                      "TNC_COST", "DRIVE_TIME"}));
  for (const auto& n : s.layout->names()) s.set_for_all_alternatives(n, 0.0);
  s.set_for_all_alternatives("SHUTTLE_WAIT", 30.0);
  s.set_for_all_alternatives("TNC_WAIT", 9.55);
  PersonCovariates person;
  for (const auto& n : person_covariate_names()) person[n] = 0.0;
  person["MILLENNIAL"] = 1.0;

  CHECK(design_row(s, person, A::ask_ride, spec).empty());

  const auto shuttle = design_row(s, person, A::shuttle_bus, spec);
  CHECK(row_value(shuttle, *spec.find_slot("b_shuttle_wait")) == 30.0);
  CHECK(row_value(shuttle, *spec.find_slot("asc_shuttle_bus")) == 1.0);

  const auto tnc = design_row(s, person, A::tnc, spec);
  CHECK(row_value(tnc, *spec.find_slot("b_tnc_millennial")) == 1.0);
  CHECK(row_value(tnc, *spec.find_slot("b_tnc_wait")) == 9.55);
  // rows only touch the alternative's own terms, in term order
  for (std::size_t i = 1; i < tnc.size(); ++i) CHECK(tnc[i - 1].first < tnc[i].first);
  for (const auto& [slot, x] : tnc) CHECK(spec.terms()[slot].alternative == A::tnc);
}

TEST_CASE("design_row: situation value shadows the person value") {
  const ModelSpec spec(A::ask_ride, {{A::taxi, "TRUST", "b_trust", TermKind::fixed}});
  ChoiceSituation s(mxt::make_layout({"TRUST"}));
  s.set_covariate(A::taxi, "TRUST", 0.25);
  CHECK(design_row(s, {{"TRUST", 1.0}}, A::taxi, spec) == SparseRow{{0, 0.25}});
}

TEST_CASE("design_row: missing covariate names the covariate") {
  const ModelSpec spec(A::ask_ride, {{A::tnc, "TNC_WAIT", "b_wait", TermKind::fixed}});
  ChoiceSituation s(mxt::make_layout({}));
  s.situation_index = 3;
  try {
    design_row(s, {}, A::tnc, spec, "resp7");
    FAIL("expected MissingCovariate");
  } catch (const MissingCovariate& e) {
    CHECK(e.name() == "TNC_WAIT");
    CHECK(e.respondent() == "resp7");
    CHECK(e.situation() == 3);
  }
}

TEST_CASE("utility from design rows does not depend on term order") {
  const auto panel = mxt::random_panel(20, 2, 5);
  const auto base = mxt::small_spec(0);
  std::mt19937_64 gen(11);
  std::normal_distribution<double> normal;
  std::vector<double> means(base.n_terms());
  for (auto& m : means) m = normal(gen);

  for (int rep = 0; rep < 10; ++rep) {
    std::vector<std::size_t> perm(base.n_terms());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<UtilityTerm> terms;
    std::vector<double> permuted_means;
    for (auto i : perm) {
      terms.push_back(base.terms()[i]);
      permuted_means.push_back(means[i]);
    }
    const ModelSpec shuffled(base.base_alternative(), terms);
    for (const auto& r : panel.respondents) {
      for (const auto& s : r.situations) {
        for (auto alt : kAllAlternatives) {
          double v1 = 0.0, v2 = 0.0;
          for (const auto& [slot, x] : design_row(s, r.person, alt, base)) v1 += means[slot] * x;
          for (const auto& [slot, x] : design_row(s, r.person, alt, shuffled)) v2 += permuted_means[slot] * x;
          CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
        }
      }
    }
  }
}
