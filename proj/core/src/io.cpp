#include "mxl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mxl/detail/format.hpp"
#include "mxl/errors.hpp"
#include "mxl/likelihood.hpp"

namespace mxl {
namespace {

using nlohmann::json;

constexpr std::string_view kRequired[] = {"respondent_id", "situation_id", "alt", "avail", "chosen"};

// Splits one CSV record. Double quotes wrap fields containing commas;
// "" inside quotes is a literal quote.
std::vector<std::string> split_record(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else if (c == '"' && cur.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError(line_no, fields.size() + 1, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string quote_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_blank(std::string_view s) {
  s = trim(s);
  return s.empty() || s == "NA";
}

bool parse_flag(std::string_view s, std::size_t line, std::size_t col, std::string_view what) {
  s = trim(s);
  if (s == "1") return true;
  if (s == "0") return false;
  throw ParseError(line, col, std::string(what) + " must be 0 or 1, got '" + std::string(s) + "'");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json optional_number(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

template <class T>
void read_if(const json& doc, const char* key, T& target) {
  if (auto it = doc.find(key); it != doc.end() && !it->is_null()) target = it->get<T>();
}

}  // namespace

// ---- panel table -------------------------------------------------------------

ChoicePanel read_panel(std::istream& in, ReadMode mode) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, 0, "missing header row");
  ++line_no;
  const auto header = split_record(line, line_no);

  std::array<std::size_t, 5> req{};
  std::array<bool, 5> seen{};
  std::vector<std::string> situation_names;
  std::vector<std::size_t> situation_cols;
  std::vector<std::pair<std::string, std::size_t>> person_cols;
  std::set<std::string, std::less<>> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name(trim(header[c]));
    if (name.empty()) throw ParseError(1, c + 1, "empty column name");
    if (!names.insert(name).second) throw ParseError(1, c + 1, "duplicate column '" + name + "'");
    const auto it = std::find(std::begin(kRequired), std::end(kRequired), name);
    if (it != std::end(kRequired)) {
      const auto k = static_cast<std::size_t>(it - std::begin(kRequired));
      req[k] = c;
      seen[k] = true;
    } else if (is_person_covariate(name)) {
      person_cols.emplace_back(name, c);
    } else {
      situation_names.push_back(name);
      situation_cols.push_back(c);
    }
  }
  for (std::size_t k = 0; k < req.size(); ++k) {
    if (!seen[k]) throw ParseError(1, 0, "missing required column '" + std::string(kRequired[k]) + "'");
  }
  const auto layout = std::make_shared<const CovariateLayout>(situation_names);

  struct SituationState {
    std::size_t first_line = 0;
    std::array<bool, kNumAlternatives> has_row{};
    bool has_chosen = false;
  };
  ChoicePanel panel;
  std::unordered_map<std::string, std::size_t> respondent_pos;
  std::vector<std::unordered_map<std::size_t, std::size_t>> situation_pos;
  std::vector<std::vector<SituationState>> state;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_record(line, line_no);
    if (f.size() != header.size()) {
      throw ParseError(line_no, 0, "expected " + std::to_string(header.size()) + " fields, got " +
                                       std::to_string(f.size()));
    }

    const std::string rid(trim(f[req[0]]));
    if (rid.empty()) throw ParseError(line_no, req[0] + 1, "empty respondent_id");

    const auto sid_text = trim(f[req[1]]);
    std::size_t sid = 0;
    auto [ptr, ec] = std::from_chars(sid_text.data(), sid_text.data() + sid_text.size(), sid);
    if (sid_text.empty() || ec != std::errc{} || ptr != sid_text.data() + sid_text.size()) {
      throw ParseError(line_no, req[1] + 1,
                       "situation_id must be a non-negative integer, got '" + std::string(sid_text) + "'");
    }

    const auto alt = parse_alternative(trim(f[req[2]]));
    if (!alt) {
      throw ParseError(line_no, req[2] + 1, "unknown alternative '" + std::string(trim(f[req[2]])) + "'");
    }
    const bool avail = parse_flag(f[req[3]], line_no, req[3] + 1, "avail");
    const bool chosen = parse_flag(f[req[4]], line_no, req[4] + 1, "chosen");

    auto [rit, new_resp] = respondent_pos.try_emplace(rid, panel.respondents.size());
    if (new_resp) {
      panel.respondents.push_back(Respondent{rid, {}, {}});
      situation_pos.emplace_back();
      state.emplace_back();
    }
    const std::size_t n = rit->second;
    Respondent& resp = panel.respondents[n];

    auto [sit, new_sit] = situation_pos[n].try_emplace(sid, resp.situations.size());
    if (new_sit) {
      ChoiceSituation s(layout);
      s.situation_index = sid;
      s.availability.fill(false);
      resp.situations.push_back(std::move(s));
      state[n].push_back(SituationState{line_no, {}, false});
    }
    ChoiceSituation& s = resp.situations[sit->second];
    SituationState& st = state[n][sit->second];
    const std::size_t a = index_of(*alt);

    if (st.has_row[a]) {
      throw ParseError(line_no, req[2] + 1, "duplicate row for alternative '" + std::string(to_string(*alt)) + "'");
    }
    st.has_row[a] = true;
    s.availability[a] = avail;
    if (chosen) {
      if (st.has_chosen) throw ParseError(line_no, req[4] + 1, "more than one chosen alternative");
      if (!avail && mode == ReadMode::strict) throw ChosenUnavailable(rid, sid);
      st.has_chosen = true;
      s.chosen = *alt;
    }

    for (std::size_t k = 0; k < situation_cols.size(); ++k) {
      const auto& cell = f[situation_cols[k]];
      if (is_blank(cell)) continue;
      const auto v = parse_number(cell);
      if (!v) {
        throw ParseError(line_no, situation_cols[k] + 1,
                         "non-numeric value '" + std::string(trim(cell)) + "'");
      }
      s.values[a * layout->size() + k] = *v;
    }
    for (const auto& [name, col] : person_cols) {
      const auto& cell = f[col];
      if (is_blank(cell)) continue;
      const auto v = parse_number(cell);
      if (!v) throw ParseError(line_no, col + 1, "non-numeric value '" + std::string(trim(cell)) + "'");
      auto [pit, inserted] = resp.person.try_emplace(name, *v);
      if (!inserted && pit->second != *v) throw InconsistentPersonCovariate(rid, name);
    }
  }

  for (std::size_t n = 0; n < panel.respondents.size(); ++n) {
    for (const auto& st : state[n]) {
      if (!st.has_chosen) throw ParseError(st.first_line, 0, "situation has no chosen alternative");
    }
  }
  return panel;
}

ChoicePanel read_panel(const std::filesystem::path& path, ReadMode mode) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, 0, "cannot open '" + path.string() + "'");
  return read_panel(in, mode);
}

void write_panel(std::ostream& out, const ChoicePanel& panel) {
  std::vector<std::string> situation_names;
  std::set<std::string, std::less<>> situation_seen;
  std::set<std::string, std::less<>> person_seen;
  const CovariateLayout* last = nullptr;
  for (const auto& r : panel.respondents) {
    for (const auto& [name, v] : r.person) person_seen.insert(name);
    for (const auto& s : r.situations) {
      if (!s.layout || s.layout.get() == last) continue;
      last = s.layout.get();
      for (const auto& name : s.layout->names()) {
        if (situation_seen.insert(name).second) situation_names.push_back(name);
      }
    }
  }
  std::vector<std::string> person_names;
  for (const auto& name : person_covariate_names()) {
    if (person_seen.count(name)) person_names.push_back(name);
  }
  for (const auto& name : person_seen) {
    if (!is_person_covariate(name)) person_names.push_back(name);
  }
  for (const auto& name : person_names) {
    if (situation_seen.count(name)) {
      throw Error("covariate '" + name + "' is both person-level and situation-level");
    }
  }

  out << "respondent_id,situation_id,alt,avail,chosen";
  for (const auto& name : situation_names) out << ',' << quote_field(name);
  for (const auto& name : person_names) out << ',' << quote_field(name);
  out << '\n';

  std::vector<std::optional<std::size_t>> column_map;
  last = nullptr;
  for (const auto& r : panel.respondents) {
    const std::string rid = quote_field(r.id);
    std::string person_tail;
    for (const auto& name : person_names) {
      person_tail += ',';
      if (auto it = r.person.find(name); it != r.person.end() && std::isfinite(it->second)) {
        person_tail += detail::format_double(it->second);
      }
    }
    for (const auto& s : r.situations) {
      if (s.layout.get() != last) {
        last = s.layout.get();
        column_map.assign(situation_names.size(), std::nullopt);
        for (std::size_t k = 0; k < situation_names.size(); ++k) {
          if (s.layout) column_map[k] = s.layout->find(situation_names[k]);
        }
      }
      for (auto alt : kAllAlternatives) {
        const std::size_t a = index_of(alt);
        out << rid << ',' << s.situation_index << ',' << to_string(alt) << ','
            << (s.availability[a] ? '1' : '0') << ',' << (s.chosen == alt ? '1' : '0');
        for (const auto& col : column_map) {
          out << ',';
          if (!col) continue;
          const double v = s.values[a * s.layout->size() + *col];
          if (std::isfinite(v)) out << detail::format_double(v);
        }
        out << person_tail << '\n';
      }
    }
  }
}

void write_panel(const std::filesystem::path& path, const ChoicePanel& panel) {
  std::ostringstream buf;
  write_panel(buf, panel);
  write_file_atomic(path, buf.str());
}

// ---- JSON documents --------------------------------------------------------

json spec_to_json(const ModelSpec& spec) {
  json terms = json::array();
  for (const auto& t : spec.terms()) {
    terms.push_back({{"alt", to_string(t.alternative)},
                     {"covariate", t.covariate},
                     {"parameter", t.parameter},
                     {"kind", to_string(t.kind)}});
  }
  return {{"base_alternative", to_string(spec.base_alternative())}, {"terms", terms}};
}

ModelSpec spec_from_json(const json& doc) {
  try {
    const auto base_text = doc.value("base_alternative", std::string(to_string(kBaseAlternative)));
    const auto base = parse_alternative(base_text);
    if (!base) throw SpecError("unknown base alternative '" + base_text + "'");
    std::vector<UtilityTerm> terms;
    for (const auto& t : doc.at("terms")) {
      const auto alt_text = t.at("alt").get<std::string>();
      const auto alt = parse_alternative(alt_text);
      if (!alt) throw SpecError("unknown alternative '" + alt_text + "'");
      const auto kind_text = t.value("kind", std::string("fixed"));
      const auto kind = parse_term_kind(kind_text);
      if (!kind) throw SpecError("unknown term kind '" + kind_text + "'");
      terms.push_back({*alt, t.at("covariate").get<std::string>(), t.at("parameter").get<std::string>(), *kind});
    }
    return ModelSpec(*base, std::move(terms));
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed spec document: ") + e.what());
  }
}

json options_to_json(const EstimationOptions& o) {
  return {{"draws", o.n_draws},
          {"seed", o.seed},
          {"discard", o.discard},
          {"scramble", o.scramble},
          {"max_iterations", o.max_iterations},
          {"gradient_tolerance", o.gradient_tolerance},
          {"step_tolerance", o.step_tolerance},
          {"stderr", to_string(o.stderr_method)},
          {"start", to_string(o.start)}};
}

EstimationOptions options_from_json(const json& doc, EstimationOptions o) {
  if (doc.is_null()) return o;
  try {
    read_if(doc, "draws", o.n_draws);
    read_if(doc, "seed", o.seed);
    read_if(doc, "discard", o.discard);
    read_if(doc, "scramble", o.scramble);
    read_if(doc, "max_iterations", o.max_iterations);
    read_if(doc, "gradient_tolerance", o.gradient_tolerance);
    read_if(doc, "step_tolerance", o.step_tolerance);
    if (auto it = doc.find("stderr"); it != doc.end()) {
      const auto m = parse_stderr_method(it->get<std::string>());
      if (!m) throw InvalidOptions("unknown stderr method '" + it->get<std::string>() + "'");
      o.stderr_method = *m;
    }
    if (auto it = doc.find("start"); it != doc.end()) {
      const auto m = parse_start_method(it->get<std::string>());
      if (!m) throw InvalidOptions("unknown start method '" + it->get<std::string>() + "'");
      o.start = *m;
    }
  } catch (const json::exception& e) {
    throw InvalidOptions(std::string("malformed options block: ") + e.what());
  }
  return o;
}

json theta_to_json(const ModelSpec& spec, const ParameterVector& theta) {
  spec.check(theta);
  const auto names = spec.slot_names();
  json params = json::array();
  for (std::size_t i = 0; i < names.size(); ++i) params.push_back({{"name", names[i]}, {"value", theta[i]}});
  return {{"parameters", params}};
}

ParameterVector theta_from_json(const json& doc, const ModelSpec& spec) {
  ParameterVector theta{std::vector<double>(spec.n_slots(), 0.0)};
  std::vector<bool> set(spec.n_slots(), false);
  try {
    for (const auto& p : doc.at("parameters")) {
      const auto name = p.at("name").get<std::string>();
      const auto slot = spec.find_slot(name);
      if (!slot) throw SpecError("parameter '" + name + "' is not in the spec");
      if (set[*slot]) throw SpecError("parameter '" + name + "' given twice");
      theta[*slot] = p.contains("value") ? p.at("value").get<double>() : p.at("estimate").get<double>();
      set[*slot] = true;
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed parameter document: ") + e.what());
  }
  const auto names = spec.slot_names();
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!set[i]) throw SpecError("parameter '" + names[i] + "' is missing");
  }
  return theta;
}

#define MXL_GENERATOR_FIELDS(X)                                                                   \
  X(household_size) X(income) X(gender) X(age) X(race) X(education) X(employment)                 \
  X(low_income_share) X(trust_share) X(rideshare_share) X(tech_access_share)                      \
  X(vehicle_access_share) X(distance_mean) X(distance_sd) X(cta_rail_share) X(metra_share)        \
  X(pace_share) X(mandatory_share) X(shop_share) X(alone_share) X(retail_density_mean)            \
  X(retail_density_sd) X(ndnsty_ped_mean) X(ndnsty_ped_sd) X(ndnsty_ped_floor) X(speed_min_mph)   \
  X(speed_max_mph) X(tnc_base_fare) X(tnc_per_mile) X(surge_min) X(surge_max)                     \
  X(shuttle_wait_mean) X(shuttle_wait_mean_metra) X(shuttle_wait_mean_cta_rail)                   \
  X(shuttle_wait_cv) X(tnc_wait_mean) X(tnc_wait_sd) X(taxi_wait_mean) X(taxi_wait_sd)            \
  X(taxi_wait_min) X(taxi_wait_max)

json generator_config_to_json(const GeneratorConfig& c) {
  json doc = json::object();
#define X(field) doc[#field] = c.field;
  MXL_GENERATOR_FIELDS(X)
#undef X
  return doc;
}

GeneratorConfig generator_config_from_json(const json& doc) {
  GeneratorConfig c;
  try {
    for (const auto& [key, value] : doc.items()) {
      bool known = false;
#define X(field) known = known || key == #field;
      MXL_GENERATOR_FIELDS(X)
#undef X
      if (!known) throw InvalidOptions("unknown generator setting '" + key + "'");
    }
#define X(field) read_if(doc, #field, c.field);
    MXL_GENERATOR_FIELDS(X)
#undef X
  } catch (const json::exception& e) {
    throw InvalidOptions(std::string("malformed generator config: ") + e.what());
  }
  return c;
}

#undef MXL_GENERATOR_FIELDS

std::string spec_hash(const ModelSpec& spec) { return hex64(fnv1a(spec_to_json(spec).dump())); }

json results_to_json(const ModelSpec& spec, const EstimationResult& r) {
  json params = json::array();
  for (std::size_t i = 0; i < r.slot_names.size(); ++i) {
    const std::string kind = spec.is_sd_slot(i) ? "sd" : std::string(to_string(spec.terms()[i].kind));
    params.push_back({{"name", r.slot_names[i]},
                      {"kind", kind},
                      {"estimate", r.theta_hat[i]},
                      {"std_error", optional_number(r.std_errors[i])},
                      {"p_value", optional_number(r.p_values[i])}});
  }

  json unidentified = json::array();
  for (auto slot : r.unidentified_slots) unidentified.push_back(r.slot_names[slot]);

  return {
      {"format", "mxl-results/1"},
      {"spec", spec_to_json(spec)},
      {"spec_hash", spec_hash(spec)},
      {"options", options_to_json(r.options)},
      {"draws",
       {{"per_respondent", r.draws_used},
        {"bases", r.draw_meta.bases},
        {"discard", r.draw_meta.discard},
        {"scramble_seed", r.draw_meta.scramble_seed ? json(*r.draw_meta.scramble_seed) : json(nullptr)}}},
      {"parameters", params},
      {"fit",
       {{"ll_final", r.ll_final},
        {"ll_null_equal_shares", r.ll_null},
        {"ll_null_constants", r.ll_null_constants},
        {"rho2_equal_shares", r.rho2},
        {"rho2_constants", r.rho2_constants},
        {"ll_mnl", r.ll_mnl},
        {"rho2_mnl", r.rho2_mnl},
        {"rho2_mnl_constants", r.rho2_mnl_constants},
        {"aic", r.aic},
        {"bic", r.bic},
        {"n_parameters", r.slot_names.size()},
        {"n_obs", r.n_obs},
        {"n_respondents", r.n_respondents}}},
      {"convergence",
       {{"converged", r.converged},
        {"iterations", r.iterations},
        {"mnl_iterations", r.mnl_iterations},
        {"gradient_max_norm", r.gradient_max_norm},
        {"message", r.message},
        {"hessian_singular", r.hessian_singular},
        {"unidentified", unidentified}}},
  };
}

double replay_loglik(const json& results, const ChoicePanel& panel) {
  const ModelSpec spec = spec_from_json(results.at("spec"));
  if (auto it = results.find("spec_hash"); it != results.end() && it->get<std::string>() != spec_hash(spec)) {
    throw SpecError("spec hash does not match the echoed spec");
  }
  const EstimationOptions options = options_from_json(results.at("options"));
  const ParameterVector theta = theta_from_json(results, spec);
  const DrawSet draws = estimation_draws(panel.respondents.size(), spec, options);
  return sim_loglik(panel, spec, theta, draws);
}

Scenario scenario_from_json(const json& doc) {
  try {
    Scenario sc;
    sc.label = doc.value("label", std::string("scenario"));
    const json person = doc.value("person", json::object());
    for (const auto& [name, v] : person.items()) sc.person[name] = v.get<double>();

    std::vector<std::string> names;
    std::vector<double> values;
    const json situation = doc.value("situation", json::object());
    for (const auto& [name, v] : situation.items()) {
      names.push_back(name);
      values.push_back(v.get<double>());
    }
    sc.situation = ChoiceSituation(std::make_shared<const CovariateLayout>(names));
    for (std::size_t k = 0; k < names.size(); ++k) sc.situation.set_for_all_alternatives(names[k], values[k]);

    Availability avail = kAllAvailable;
    if (auto it = doc.find("available"); it != doc.end()) {
      avail.fill(false);
      for (const auto& a : *it) {
        const auto alt = parse_alternative(a.get<std::string>());
        if (!alt) throw ParseError(0, 0, "unknown alternative '" + a.get<std::string>() + "'");
        avail[index_of(*alt)] = true;
      }
    }
    sc.situation.availability = apply_availability(doc.value("has_vehicle_access", true), avail);
    return sc;
  } catch (const json::exception& e) {
    throw ParseError(0, 0, std::string("malformed scenario document: ") + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, 0, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, 0, path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot rename onto '" + path.string() + "'");
  }
}

}  // namespace mxl
