#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "mxl/analytics.hpp"
#include "mxl/estimator.hpp"
#include "mxl/model_spec.hpp"
#include "mxl/panel.hpp"
#include "mxl/scenario_gen.hpp"

namespace mxl {

// ---- long-format panel table ----------------------------------------------

enum class ReadMode : std::uint8_t {
  strict,   // a chosen row that is unavailable throws ChosenUnavailable
  lenient,  // keep it so validate_panel can report it
};

/// Reads one row per (respondent, situation, alternative). Respondents and
/// situations keep first-appearance order. Alternatives without a row are
/// unavailable. Person-level columns are lifted to the respondent; blank
/// cells are absent values.
/// Throws ParseError, InconsistentPersonCovariate, ChosenUnavailable.
ChoicePanel read_panel(std::istream& in, ReadMode mode = ReadMode::strict);
ChoicePanel read_panel(const std::filesystem::path& path, ReadMode mode = ReadMode::strict);

void write_panel(std::ostream& out, const ChoicePanel& panel);
void write_panel(const std::filesystem::path& path, const ChoicePanel& panel);

// ---- JSON documents --------------------------------------------------------

/// Spec document: base_alternative, terms[{alt, covariate, parameter, kind}]
/// and an optional options block.
nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& doc);

/// Options block keys: draws, seed, discard, scramble, max_iterations,
/// gradient_tolerance, step_tolerance, stderr, start. Missing keys keep
/// the defaults in `base`.
nlohmann::json options_to_json(const EstimationOptions& options);
EstimationOptions options_from_json(const nlohmann::json& doc, EstimationOptions base = {});

/// parameters[{name, value}] in any order; a results document's "estimate"
/// field is accepted in place of "value". Throws SpecError on unknown or
/// missing names.
nlohmann::json theta_to_json(const ModelSpec& spec, const ParameterVector& theta);
ParameterVector theta_from_json(const nlohmann::json& doc, const ModelSpec& spec);

nlohmann::json generator_config_to_json(const GeneratorConfig& config);
GeneratorConfig generator_config_from_json(const nlohmann::json& doc);

/// FNV-1a 64 of the canonical spec text, as 16 hex digits.
std::string spec_hash(const ModelSpec& spec);

/// Everything needed to replay an estimation run. Contains no timings.
nlohmann::json results_to_json(const ModelSpec& spec, const EstimationResult& result);

/// Simulated log-likelihood at a results document's estimate with its
/// echoed spec, options and draws.
double replay_loglik(const nlohmann::json& results, const ChoicePanel& panel);

/// Scenario document: label, has_vehicle_access, person{NAME: v},
/// situation{NAME: v} (applied to every alternative), optional
/// available[alt ids].
Scenario scenario_from_json(const nlohmann::json& doc);

nlohmann::json read_json(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace mxl
