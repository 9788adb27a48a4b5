#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mxl/analytics.hpp"
#include "mxl/draws.hpp"
#include "mxl/errors.hpp"
#include "mxl/estimator.hpp"
#include "mxl/io.hpp"
#include "mxl/likelihood.hpp"
#include "mxl/model_spec.hpp"
#include "mxl/random.hpp"
#include "mxl/scenario_gen.hpp"

namespace mxl::cli {
namespace {

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file_atomic(path, content);
  }
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string opt_fixed(const std::optional<double>& v, int digits) { return v ? fixed(*v, digits) : "-"; }

struct Context {
  std::ostream& out;
  std::ostream& err;
};

// ---- estimate -------------------------------------------------------------

struct EstimateArgs {
  std::string data, spec, out;
  std::size_t draws = kDefaultDraws;
  std::uint64_t seed = 0;
  std::uint64_t discard = kDefaultDiscard;
  bool scramble = false;
  std::size_t max_iterations = 500;
  std::string stderr_method = "bhhh";
  std::string start = "mnl";
  std::string theta;
};

void print_summary(std::ostream& out, const EstimationResult& r) {
  std::size_t width = 9;
  for (const auto& n : r.slot_names) width = std::max(width, n.size());
  out << std::left << std::setw(static_cast<int>(width)) << "parameter" << std::right << std::setw(12)
      << "estimate" << std::setw(12) << "std_error" << std::setw(10) << "p_value" << '\n';
  for (std::size_t i = 0; i < r.slot_names.size(); ++i) {
    out << std::left << std::setw(static_cast<int>(width)) << r.slot_names[i] << std::right
        << std::setw(12) << fixed(r.theta_hat[i], 4) << std::setw(12) << opt_fixed(r.std_errors[i], 4)
        << std::setw(10) << opt_fixed(r.p_values[i], 4) << '\n';
  }
  out << "observations " << r.n_obs << ", respondents " << r.n_respondents << '\n'
      << "LL(final) " << fixed(r.ll_final, 3) << ", LL(equal shares) " << fixed(r.ll_null, 3)
      << ", LL(constants) " << fixed(r.ll_null_constants, 3) << ", LL(MNL) " << fixed(r.ll_mnl, 3)
      << '\n'
      << "rho2 " << fixed(r.rho2, 4) << " (constants " << fixed(r.rho2_constants, 4) << "), AIC "
      << fixed(r.aic, 2) << ", BIC " << fixed(r.bic, 2) << '\n'
      << (r.converged ? "converged" : "NOT converged") << " after " << r.iterations
      << " iterations: " << r.message << '\n';
  if (r.hessian_singular) out << "warning: information matrix is singular\n";
}

int run_estimate(const Context& ctx, const EstimateArgs& a, const CLI::App& cmd) {
  const auto spec_doc = read_json(a.spec);
  const ModelSpec spec = spec_from_json(spec_doc);
  EstimationOptions o = options_from_json(spec_doc.value("options", nlohmann::json()));
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--draws")) o.n_draws = a.draws;
  if (given("--seed")) o.seed = a.seed;
  if (given("--discard")) o.discard = a.discard;
  if (given("--scramble")) o.scramble = a.scramble;
  if (given("--max-iterations")) o.max_iterations = a.max_iterations;
  if (given("--stderr")) {
    const auto m = parse_stderr_method(a.stderr_method);
    if (!m) throw InvalidOptions("unknown --stderr '" + a.stderr_method + "'");
    o.stderr_method = *m;
  }
  if (given("--start")) {
    const auto m = parse_start_method(a.start);
    if (!m) throw InvalidOptions("unknown --start '" + a.start + "'");
    o.start = *m;
  }
  if (!a.theta.empty()) o.initial = theta_from_json(read_json(a.theta), spec);

  const ChoicePanel panel = read_panel(a.data);
  const EstimationResult r = estimate(panel, spec, o);
  emit(a.out, results_to_json(spec, r).dump(2) + "\n", ctx.out);
  if (!a.out.empty() && a.out != "-") print_summary(ctx.out, r);
  if (!r.converged) {
    ctx.err << "estimation did not converge: " << r.message << '\n';
    return kCheckFailed;
  }
  return kOk;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string spec, theta, out, config;
  std::size_t respondents = 0;
  std::size_t situations = 4;
  std::uint64_t seed = 0;
};

int run_simulate(const Context& ctx, const SimulateArgs& a) {
  const ModelSpec spec = spec_from_json(read_json(a.spec));
  const ParameterVector theta = theta_from_json(read_json(a.theta), spec);
  const GeneratorConfig config = a.config.empty() ? GeneratorConfig{} : generator_config_from_json(read_json(a.config));
  const ChoicePanel panel = generate_panel(a.respondents, a.situations, spec, theta, a.seed, config);
  std::ostringstream buf;
  write_panel(buf, panel);
  emit(a.out, buf.str(), ctx.out);
  return kOk;
}

// ---- predict --------------------------------------------------------------

struct PredictArgs {
  std::string spec, theta, data, out;
  std::size_t draws = kDefaultDraws;
};

int run_predict(const Context& ctx, const PredictArgs& a) {
  const ModelSpec spec = spec_from_json(read_json(a.spec));
  const ParameterVector theta = theta_from_json(read_json(a.theta), spec);
  const ChoicePanel panel = read_panel(a.data, ReadMode::lenient);
  const DrawSet block = halton_normal_draws(1, a.draws, spec.n_random());

  ShareTable table;
  table.key = "situation";
  AltValues mean{};
  std::size_t count = 0;
  for (const auto& r : panel.respondents) {
    for (const auto& s : r.situations) {
      ShareRow row;
      row.label = r.id + "/" + std::to_string(s.situation_index);
      row.shares = predict_probs(s, r.person, spec, theta, block.respondent_block(0), a.draws);
      for (std::size_t j = 0; j < kNumAlternatives; ++j) mean[j] += row.shares[j];
      ++count;
      table.rows.push_back(std::move(row));
    }
  }
  if (count == 0) throw EmptyScenarioSet("data file has no choice situations");
  for (auto& m : mean) m /= static_cast<double>(count);
  table.rows.push_back(ShareRow{"mean", 0.0, mean});

  std::ostringstream buf;
  table.write_csv(buf);
  emit(a.out, buf.str(), ctx.out);
  return kOk;
}

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
  std::string spec, theta, scenario, covariate, out;
  double from = 0.0, to = 0.0, step = 1.0;
  std::size_t draws = kDefaultDraws;
};

int run_sweep(const Context& ctx, const SweepArgs& a) {
  const ModelSpec spec = spec_from_json(read_json(a.spec));
  const ParameterVector theta = theta_from_json(read_json(a.theta), spec);
  const Scenario base = scenario_from_json(read_json(a.scenario));
  const auto grid = make_grid(a.from, a.to, a.step);
  const ShareTable table = attribute_sweep(base, spec, theta, a.covariate, grid, a.draws);
  std::ostringstream buf;
  table.write_csv(buf, true);
  emit(a.out, buf.str(), ctx.out);
  return kOk;
}

// ---- gradcheck ------------------------------------------------------------

struct GradcheckArgs {
  std::string data, spec, theta;
  std::uint64_t seed = 0;
  std::size_t draws = 100;
  double tolerance = 1e-6;
};

int run_gradcheck(const Context& ctx, const GradcheckArgs& a) {
  const ModelSpec spec = spec_from_json(read_json(a.spec));
  const ChoicePanel panel = read_panel(a.data);

  ParameterVector theta{std::vector<double>(spec.n_slots())};
  if (!a.theta.empty()) {
    theta = theta_from_json(read_json(a.theta), spec);
  } else {
    const CounterRng rng = CounterRng(a.seed).fork(0x67726164);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] = spec.is_sd_slot(i) ? rng.uniform({i}, 0.1, 0.6) : 0.1 * rng.normal({i});
    }
  }

  EstimationOptions o;
  o.n_draws = a.draws;
  o.seed = a.seed;
  const DrawSet draws = estimation_draws(panel.respondents.size(), spec, o);
  const SimulatedLikelihood ll(panel, spec);
  std::vector<double> grad(spec.n_slots());
  ll.loglik_grad(theta, draws, grad);

  const auto names = spec.slot_names();
  double worst = 0.0;
  ctx.out << std::left << std::setw(28) << "slot" << std::right << std::setw(16) << "analytic"
          << std::setw(16) << "numeric" << std::setw(12) << "rel_error" << '\n';
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta[i]));
    ParameterVector up = theta, down = theta;
    up[i] += h;
    down[i] -= h;
    const double fd = (ll.loglik(up, draws) - ll.loglik(down, draws)) / (2.0 * h);
    const double rel = std::abs(grad[i] - fd) / std::max({1.0, std::abs(grad[i]), std::abs(fd)});
    worst = std::max(worst, rel);
    std::ostringstream rel_text;
    rel_text << std::scientific << std::setprecision(2) << rel;
    ctx.out << std::left << std::setw(28) << names[i] << std::right << std::setw(16) << fixed(grad[i], 6)
            << std::setw(16) << fixed(fd, 6) << std::setw(12) << rel_text.str() << '\n';
  }
  std::ostringstream worst_text;
  worst_text << std::scientific << std::setprecision(3) << worst;
  const bool pass = worst <= a.tolerance;
  ctx.out << "max relative error " << worst_text.str() << (pass ? " PASS" : " FAIL") << '\n';
  return pass ? kOk : kCheckFailed;
}

// ---- validate -------------------------------------------------------------

int run_validate(const Context& ctx, const std::string& data) {
  const ChoicePanel panel = read_panel(data, ReadMode::lenient);
  const auto report = validate_panel(panel);
  if (report.empty()) {
    ctx.out << "ok: " << panel.respondents.size() << " respondents, " << panel.n_observations()
            << " situations\n";
    return kOk;
  }
  for (const auto& v : report) ctx.out << format_violation(panel, v) << '\n';
  ctx.err << report.size() << " violation(s)\n";
  return kDataError;
}

// ---- replay ---------------------------------------------------------------

int run_replay(const Context& ctx, const std::string& results_path, const std::string& data,
               double tolerance) {
  const auto doc = read_json(results_path);
  const ChoicePanel panel = read_panel(data);
  const double replayed = replay_loglik(doc, panel);
  const double recorded = doc.at("fit").at("ll_final").get<double>();
  const double diff = std::abs(replayed - recorded);
  std::ostringstream line;
  line << std::setprecision(17) << "recorded " << recorded << ", replayed " << replayed << ", |diff| "
       << std::setprecision(3) << diff;
  const bool pass = diff <= tolerance;
  ctx.out << line.str() << (pass ? " PASS" : " FAIL") << '\n';
  return pass ? kOk : kCheckFailed;
}

// ---- reference ------------------------------------------------------------

int run_reference(const Context& ctx, const std::string& spec_out, const std::string& theta_out) {
  const ReferenceModel ref = reference_spec();
  if (spec_out.empty() && theta_out.empty()) {
    nlohmann::json doc = spec_to_json(ref.spec);
    doc["parameters"] = theta_to_json(ref.spec, ref.theta)["parameters"];
    ctx.out << doc.dump(2) << '\n';
    return kOk;
  }
  if (!spec_out.empty()) write_file_atomic(spec_out, spec_to_json(ref.spec).dump(2) + "\n");
  if (!theta_out.empty()) write_file_atomic(theta_out, theta_to_json(ref.spec, ref.theta).dump(2) + "\n");
  return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Context ctx{out, err};
  CLI::App app{"Panel mixed logit estimation, simulation and scenario analysis", "mxl"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::function<int()> action;

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Maximum simulated likelihood estimation");
  c_est->add_option("--data", est.data, "Long-format choice data (CSV)")->required()->check(CLI::ExistingFile);
  c_est->add_option("--spec", est.spec, "Model spec (JSON)")->required()->check(CLI::ExistingFile);
  c_est->add_option("--out", est.out, "Results document path (default: stdout)");
  c_est->add_option("--draws", est.draws, "Halton draws per respondent")->check(CLI::PositiveNumber);
  c_est->add_option("--seed", est.seed, "Seed for the draw scramble");
  c_est->add_option("--discard", est.discard, "Leading Halton points to skip");
  c_est->add_flag("--scramble", est.scramble, "Random-shift the Halton draws using --seed");
  c_est->add_option("--max-iterations", est.max_iterations, "BFGS iteration cap");
  c_est->add_option("--stderr", est.stderr_method, "bhhh or hessian");
  c_est->add_option("--start", est.start, "mnl or zero");
  c_est->add_option("--theta-start", est.theta, "Starting values (JSON)")->check(CLI::ExistingFile);
  c_est->callback([&] { action = [&] { return run_estimate(ctx, est, *c_est); }; });

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Generate a synthetic survey panel");
  c_sim->add_option("--spec", sim.spec, "Model spec (JSON)")->required()->check(CLI::ExistingFile);
  c_sim->add_option("--theta", sim.theta, "True parameters (JSON)")->required()->check(CLI::ExistingFile);
  c_sim->add_option("--respondents", sim.respondents, "Number of respondents")->required()->check(CLI::PositiveNumber);
  c_sim->add_option("--situations", sim.situations, "Situations per respondent")->check(CLI::PositiveNumber);
  c_sim->add_option("--seed", sim.seed, "Random seed")->required();
  c_sim->add_option("--config", sim.config, "Generator calibration (JSON)")->check(CLI::ExistingFile);
  c_sim->add_option("--out", sim.out, "Output CSV (default: stdout)");
  c_sim->callback([&] { action = [&] { return run_simulate(ctx, sim); }; });

  PredictArgs pred;
  auto* c_pred = app.add_subcommand("predict", "Predicted choice probabilities per situation");
  c_pred->add_option("--spec", pred.spec, "Model spec (JSON)")->required()->check(CLI::ExistingFile);
  c_pred->add_option("--theta", pred.theta, "Parameters or results document (JSON)")->required()->check(CLI::ExistingFile);
  c_pred->add_option("--data", pred.data, "Long-format choice data (CSV)")->required()->check(CLI::ExistingFile);
  c_pred->add_option("--draws", pred.draws, "Halton draws")->check(CLI::PositiveNumber);
  c_pred->add_option("--out", pred.out, "Output CSV (default: stdout)");
  c_pred->callback([&] { action = [&] { return run_predict(ctx, pred); }; });

  double mean = 0.0, sd = 0.0;
  std::string direction = "negative";
  auto* c_sign = app.add_subcommand("sign-share", "Population share of a normal coefficient with a given sign");
  c_sign->add_option("--mean", mean, "Coefficient mean")->required();
  c_sign->add_option("--sd", sd, "Coefficient standard deviation")->required();
  c_sign->add_option("--direction", direction, "negative or positive")
      ->check(CLI::IsMember({"negative", "positive"}));
  c_sign->callback([&] {
    action = [&] {
      const auto dir = direction == "positive" ? SignDirection::positive : SignDirection::negative;
      out << fixed(sign_share(mean, sd, dir), 3) << '\n';
      return int{kOk};
    };
  });

  SweepArgs sw;
  auto* c_sweep = app.add_subcommand("sweep", "Predicted shares along a covariate grid");
  c_sweep->add_option("--spec", sw.spec, "Model spec (JSON)")->required()->check(CLI::ExistingFile);
  c_sweep->add_option("--theta", sw.theta, "Parameters or results document (JSON)")->required()->check(CLI::ExistingFile);
  c_sweep->add_option("--scenario", sw.scenario, "Base scenario (JSON)")->required()->check(CLI::ExistingFile);
  c_sweep->add_option("--covariate", sw.covariate, "Covariate to vary")->required();
  c_sweep->add_option("--from", sw.from, "Grid start")->required();
  c_sweep->add_option("--to", sw.to, "Grid end (inclusive)")->required();
  c_sweep->add_option("--step", sw.step, "Grid step")->required();
  c_sweep->add_option("--draws", sw.draws, "Halton draws")->check(CLI::PositiveNumber);
  c_sweep->add_option("--out", sw.out, "Output CSV (default: stdout)");
  c_sweep->callback([&] { action = [&] { return run_sweep(ctx, sw); }; });

  GradcheckArgs gc;
  auto* c_grad = app.add_subcommand("gradcheck", "Compare the analytic gradient with central differences");
  c_grad->add_option("--data", gc.data, "Long-format choice data (CSV)")->required()->check(CLI::ExistingFile);
  c_grad->add_option("--spec", gc.spec, "Model spec (JSON)")->required()->check(CLI::ExistingFile);
  c_grad->add_option("--seed", gc.seed, "Seed for the evaluation point");
  c_grad->add_option("--theta", gc.theta, "Evaluation point (JSON)")->check(CLI::ExistingFile);
  c_grad->add_option("--draws", gc.draws, "Halton draws per respondent")->check(CLI::PositiveNumber);
  c_grad->add_option("--tolerance", gc.tolerance, "Maximum relative error");
  c_grad->callback([&] { action = [&] { return run_gradcheck(ctx, gc); }; });

  std::string validate_data;
  auto* c_val = app.add_subcommand("validate", "Check a data file against the panel invariants");
  c_val->add_option("--data", validate_data, "Long-format choice data (CSV)")->required()->check(CLI::ExistingFile);
  c_val->callback([&] { action = [&] { return run_validate(ctx, validate_data); }; });

  std::string replay_results, replay_data;
  double replay_tol = 1e-9;
  auto* c_rep = app.add_subcommand("replay", "Re-evaluate a results document's log-likelihood");
  c_rep->add_option("--results", replay_results, "Results document (JSON)")->required()->check(CLI::ExistingFile);
  c_rep->add_option("--data", replay_data, "Data the results were estimated on")->required()->check(CLI::ExistingFile);
  c_rep->add_option("--tolerance", replay_tol, "Allowed absolute difference");
  c_rep->callback([&] { action = [&] { return run_replay(ctx, replay_results, replay_data, replay_tol); }; });

  std::string ref_spec, ref_theta;
  auto* c_ref = app.add_subcommand("reference", "Write the reference model");
  c_ref->add_option("--spec-out", ref_spec, "Spec document path");
  c_ref->add_option("--theta-out", ref_theta, "Parameter document path");
  c_ref->callback([&] { action = [&] { return run_reference(ctx, ref_spec, ref_theta); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    const CLI::App* failing = &app;
    for (const auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return kUsage;
  }

  try {
    return action();
  } catch (const InvalidOptions& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace mxl::cli
