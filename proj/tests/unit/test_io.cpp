#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "mxl/errors.hpp"
#include "mxl/io.hpp"
#include "mxl/likelihood.hpp"

using namespace mxl;
using A = AlternativeId;
namespace fs = std::filesystem;

namespace {

const std::string kHeader = "respondent_id,situation_id,alt,avail,chosen,SHUTTLE_WAIT,TRUST\n";

std::string seven_rows(const std::string& id, int sid, const std::string& chosen, const std::string& trust = "1") {
  std::string out;
  for (auto alt : kAllAlternatives) {
    const std::string a(to_string(alt));
    out += id + "," + std::to_string(sid) + "," + a + ",1," + (a == chosen ? "1" : "0") + ",20," + trust + "\n";
  }
  return out;
}

ChoicePanel parse(const std::string& text, ReadMode mode = ReadMode::strict) {
  std::istringstream in(text);
  return read_panel(in, mode);
}

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "mxl_test_io";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal file: one respondent, one situation") {
  const auto panel = read_panel(fs::path(MXL_FIXTURE_DIR) / "minimal.csv");
  REQUIRE(panel.respondents.size() == 1);
  const auto& r = panel.respondents[0];
  CHECK(r.id == "p1");
  REQUIRE(r.situations.size() == 1);
  CHECK(r.situations[0].chosen == A::shuttle_bus);
  CHECK(r.situations[0].availability == kAllAvailable);
  CHECK(r.person.at("TRUST") == 1.0);
  CHECK(r.situations[0].covariate(A::tnc, "SHUTTLE_WAIT") == 20.0);
  // person columns are not situation covariates
  CHECK_FALSE(r.situations[0].layout->find("TRUST").has_value());
}

TEST_CASE("grouping keeps first-appearance order") {
  const auto panel = parse(kHeader + seven_rows("b", 0, "tnc") + seven_rows("a", 0, "taxi") +
                           seven_rows("b", 1, "ask_ride"));
  REQUIRE(panel.respondents.size() == 2);
  CHECK(panel.respondents[0].id == "b");
  CHECK(panel.respondents[0].situations.size() == 2);
  CHECK(panel.respondents[0].situations[1].chosen == A::ask_ride);
  CHECK(panel.respondents[1].situations[0].chosen == A::taxi);
}

TEST_CASE("missing alternative rows are unavailable") {
  std::string text = kHeader;
  for (auto alt : kAllAlternatives) {
    if (alt == A::personal_auto) continue;
    const std::string a(to_string(alt));
    text += "x,0," + a + ",1," + (alt == A::tnc ? "1" : "0") + ",5,0\n";
  }
  const auto panel = parse(text);
  CHECK_FALSE(panel.respondents[0].situations[0].availability[index_of(A::personal_auto)]);
  CHECK(count_available(panel.respondents[0].situations[0].availability) == 6);
}

TEST_CASE("parse errors carry line and column") {
  auto expect_error = [](const std::string& text, std::size_t line, std::size_t column) {
    try {
      parse(text);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(e.column() == column);
    }
  };
  std::string bicycle = kHeader + seven_rows("a", 0, "tnc");
  bicycle += "a,1,bicycle,1,0,5,1\n";
  expect_error(bicycle, 9, 3);

  expect_error("respondent_id,alt,avail,chosen\n", 1, 0);                      // missing column
  expect_error(kHeader + "a,0,tnc,1,0,abc,1\n", 2, 6);                         // non-numeric
  expect_error(kHeader + "a,0,tnc,2,0,5,1\n", 2, 4);                           // bad flag
  expect_error(kHeader + "a,x,tnc,1,0,5,1\n", 2, 2);                           // bad situation id
  expect_error(kHeader + "a,0,tnc,1,1,5,1\na,0,tnc,1,0,5,1\n", 3, 3);          // duplicate row
  expect_error(kHeader + "a,0,tnc,1,1,5,1\na,0,taxi,1,1,5,1\n", 3, 5);         // two chosen
  expect_error(kHeader + "a,0,tnc,1,0,5,1\na,0,taxi,1,0,5,1\n", 2, 0);         // none chosen
  expect_error(kHeader + "a,0,tnc,1,1,5\n", 2, 0);                             // short row
  expect_error("respondent_id,situation_id,alt,avail,chosen,X,X\n", 1, 7);     // duplicate column
  expect_error("", 1, 0);                                                       // empty file

  try {
    parse(bicycle);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 9") != std::string::npos);
    CHECK(std::string(e.what()).find("bicycle") != std::string::npos);
  }
}

TEST_CASE("person covariates must agree across a respondent's rows") {
  const auto text = kHeader + seven_rows("a", 0, "tnc", "1") + seven_rows("a", 1, "tnc", "0");
  CHECK_THROWS_AS(parse(text), InconsistentPersonCovariate);
}

TEST_CASE("chosen-unavailable: strict throws, lenient keeps it") {
  const auto path = fs::path(MXL_FIXTURE_DIR) / "chosen_unavailable.csv";
  CHECK_THROWS_AS(read_panel(path), ChosenUnavailable);
  const auto panel = read_panel(path, ReadMode::lenient);
  const auto report = validate_panel(panel);
  REQUIRE(report.size() == 1);
  CHECK(report[0].rule == ViolationRule::chosen_unavailable);
}

TEST_CASE("blank cells are absent, not zero") {
  const auto panel = parse(kHeader + "a,0,tnc,1,1,,1\na,0,taxi,1,0,NA,1\n");
  CHECK_FALSE(panel.respondents[0].situations[0].covariate(A::tnc, "SHUTTLE_WAIT").has_value());
  const auto spec = ModelSpec(kBaseAlternative, {{A::tnc, "SHUTTLE_WAIT", "b", TermKind::fixed}});
  CHECK_THROWS_AS(SimulatedLikelihood(panel, spec), MissingCovariate);
}

TEST_CASE("quoted fields") {
  const auto panel = parse(kHeader + "\"a,b\",0,tnc,1,1,5,1\n\"a,b\",0,taxi,1,0,5,1\n");
  CHECK(panel.respondents[0].id == "a,b");
  std::ostringstream out;
  write_panel(out, panel);
  CHECK(parse(out.str()) == panel);
}

TEST_CASE("write then read is the identity") {
  const auto ref = reference_spec();
  const auto panel = generate_panel(60, 4, ref.spec, ref.theta, 8);
  std::ostringstream out;
  write_panel(out, panel);
  const auto back = parse(out.str());
  CHECK(back == panel);
  std::ostringstream again;
  write_panel(again, back);
  CHECK(again.str() == out.str());

  const auto path = temp_dir() / "panel.csv";
  write_panel(path, panel);
  CHECK(read_panel(path) == panel);
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
}

TEST_CASE("spec documents round trip") {
  const auto ref = reference_spec();
  const auto doc = spec_to_json(ref.spec);
  CHECK(spec_from_json(doc) == ref.spec);
  CHECK(doc["terms"][1]["alt"] == "shuttle_bus");
  CHECK(doc["terms"][1]["kind"] == "random_normal");
  CHECK(spec_hash(ref.spec) == spec_hash(spec_from_json(doc)));
  CHECK(spec_hash(ref.spec) != spec_hash(ref.spec.with_all_fixed()));
  CHECK(spec_hash(ref.spec).size() == 16);

  auto bad = doc;
  bad["terms"][0]["alt"] = "bicycle";
  CHECK_THROWS_AS(spec_from_json(bad), SpecError);
  auto bad_kind = doc;
  bad_kind["terms"][0]["kind"] = "lognormal";
  CHECK_THROWS_AS(spec_from_json(bad_kind), SpecError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::object()), SpecError);
}

TEST_CASE("parameter documents") {
  const auto ref = reference_spec();
  const auto doc = theta_to_json(ref.spec, ref.theta);
  CHECK(theta_from_json(doc, ref.spec) == ref.theta);

  auto reordered = doc;
  std::reverse(reordered["parameters"].begin(), reordered["parameters"].end());
  CHECK(theta_from_json(reordered, ref.spec) == ref.theta);

  auto missing = doc;
  missing["parameters"].erase(0);
  CHECK_THROWS_AS(theta_from_json(missing, ref.spec), SpecError);
  auto unknown = doc;
  unknown["parameters"].push_back({{"name", "b_bicycle"}, {"value", 1.0}});
  CHECK_THROWS_AS(theta_from_json(unknown, ref.spec), SpecError);
}

TEST_CASE("options documents") {
  EstimationOptions o;
  o.n_draws = 123;
  o.seed = 99;
  o.scramble = true;
  o.stderr_method = StdErrMethod::numerical_hessian;
  o.start = StartMethod::zero;
  const auto back = options_from_json(options_to_json(o));
  CHECK(back.n_draws == 123);
  CHECK(back.seed == 99);
  CHECK(back.scramble);
  CHECK(back.stderr_method == StdErrMethod::numerical_hessian);
  CHECK(back.start == StartMethod::zero);
  CHECK(options_from_json(nlohmann::json{{"draws", 7}}).n_draws == 7);
  CHECK_THROWS_AS(options_from_json(nlohmann::json{{"stderr", "sandwich"}}), InvalidOptions);
}

TEST_CASE("generator config documents") {
  GeneratorConfig c;
  c.tnc_per_mile = 1.75;
  c.income = {10, 20};
  const auto back = generator_config_from_json(generator_config_to_json(c));
  CHECK(back.tnc_per_mile == 1.75);
  CHECK(back.income == std::vector<double>{10, 20});
  CHECK(generator_config_from_json(nlohmann::json{{"surge_max", 3.0}}).surge_max == 3.0);
  CHECK_THROWS_AS(generator_config_from_json(nlohmann::json{{"surge", 3.0}}), InvalidOptions);
}

TEST_CASE("results documents replay and are stable") {
  const auto spec = mxt::small_spec(2);
  const auto panel = mxt::random_panel(60, 4, 33);
  EstimationOptions o;
  o.n_draws = 30;
  o.seed = 5;
  o.scramble = true;
  const auto r = estimate(panel, spec, o);
  const auto doc = results_to_json(spec, r);
  CHECK(doc["spec_hash"] == spec_hash(spec));
  CHECK(doc["options"]["seed"] == 5);
  CHECK(doc["draws"]["scramble_seed"] == 5);
  CHECK(doc["parameters"].size() == spec.n_slots());
  CHECK(doc["parameters"][spec.n_terms()]["kind"] == "sd");
  CHECK(doc["fit"]["n_obs"] == 240);
  CHECK_FALSE(doc.dump().find("time") != std::string::npos);

  const auto text = doc.dump(2);
  const auto reloaded = nlohmann::json::parse(text);
  CHECK(std::abs(replay_loglik(reloaded, panel) - r.ll_final) <= 1e-9);
  CHECK(results_to_json(spec, estimate(panel, spec, o)).dump(2) == text);

  auto tampered = reloaded;
  tampered["spec_hash"] = "0000000000000000";
  CHECK_THROWS_AS(replay_loglik(tampered, panel), SpecError);
}

TEST_CASE("scenario documents") {
  const auto doc = nlohmann::json::parse(R"({
    "label": "late night",
    "has_vehicle_access": false,
    "person": {"TRUST": 1, "MILLENNIAL": 0},
    "situation": {"SHUTTLE_WAIT": 30, "TNC_COST": 12.5}
  })");
  const auto sc = scenario_from_json(doc);
  CHECK(sc.label == "late night");
  CHECK(sc.person.at("TRUST") == 1.0);
  CHECK(sc.situation.covariate(A::taxi, "TNC_COST") == 12.5);
  CHECK_FALSE(sc.situation.availability[index_of(A::personal_auto)]);

  auto restricted = doc;
  restricted["available"] = {"ask_ride", "tnc"};
  CHECK(count_available(scenario_from_json(restricted).situation.availability) == 2);
}

TEST_CASE("atomic writes replace the target") {
  const auto path = temp_dir() / "atomic.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), {});
  CHECK(content == "second");
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
  CHECK_THROWS_AS(write_file_atomic(temp_dir() / "no_such_dir" / "x.txt", "x"), Error);
}
