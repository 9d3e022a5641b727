// Command-line harness: run, sweep, verify-sampling, diagnose.

#include "dictlearn/harness.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dictlearn;

namespace {

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

/// One `--<field>` option per ExperimentConfig field; set flags override the
/// config file.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  json defaults;

  void attach(CLI::App* app) {
    to_json(defaults, ExperimentConfig{});
    app->add_option("--config", config_file, "JSON config with ExperimentConfig field names")->check(CLI::ExistingFile);
    for (const auto& [key, value] : defaults.items())
      options[key] = app->add_option("--" + key, values[key], "override config field '" + key + "'");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg = config_file.empty() ? ExperimentConfig{} : load_config(config_file);
    json overlay = json::object();
    for (const auto& [key, opt] : options) {
      if (opt->count() == 0) continue;
      const std::string& raw = values.at(key);
      const json& def = defaults.at(key);
      if (def.is_boolean())
        overlay[key] = parse_bool(raw);
      else if (def.is_number_unsigned())
        overlay[key] = std::stoull(raw);
      else if (def.is_number_integer())
        overlay[key] = std::stoll(raw);
      else if (def.is_number_float())
        overlay[key] = std::stod(raw);
      else if (def.is_array())
        overlay[key] = split(raw);
      else
        overlay[key] = raw;
    }
    from_json(overlay, cfg);
    cfg.validate();
    return cfg;
  }
};

void print_summary(const RunSummary& s) {
  std::cout << to_string(s.update) << ": init delta " << s.init_delta;
  if (!s.records.empty()) std::cout << " -> final delta " << s.records.back().delta << " after " << s.records.size() << " iterations";
  std::cout << "\n  termination: " << s.termination;
  if (s.fit) std::cout << "\n  geometric rate: " << s.fit->rate << " over " << s.fit->points << " points";
  else std::cout << "\n  geometric rate: n/a (" << s.fit_error << ")";
  std::cout << "\n  initial regime: " << to_string(s.init_regime.regime) << " (delta_circ " << s.init_regime.params.delta_circ
            << ", N hint " << s.init_regime.sample_size_hint << ")\n";
}

int cmd_run(const ConfigFlags& flags) {
  const ExperimentConfig cfg = flags.resolve();
  const fs::path out = cfg.output_dir;
  for (UpdateKind kind : cfg.update_kinds) {
    const fs::path dir = cfg.update_kinds.size() == 1 ? out : out / to_string(kind);
    print_summary(run_learning(cfg, kind, dir));
  }
  return 0;
}

int cmd_sweep(const ConfigFlags& flags, const std::string& axis, const std::string& values) {
  const ExperimentConfig cfg = flags.resolve();
  const auto rows = sweep(cfg, parse_sweep_axis(axis), split(values), fs::path(cfg.output_dir));
  std::cout << "value\tupdate\titers\tto_target\tfinal_delta\tplateau\trate\n";
  for (const auto& r : rows) {
    std::cout << r.value << '\t' << to_string(r.update) << '\t' << r.iterations_run << '\t'
              << (r.iterations_to_target ? std::to_string(*r.iterations_to_target) : "-") << '\t' << r.final_delta << '\t'
              << (r.plateau_level ? std::to_string(*r.plateau_level) : "-") << '\t'
              << (r.rate ? std::to_string(*r.rate) : "-") << '\n';
  }
  std::cout << "table written to " << (fs::path(cfg.output_dir) / "sweep.csv").string() << '\n';
  return 0;
}

int cmd_verify_sampling(Index K, int S, const std::string& profile, const std::string& weights, long draws,
                        std::uint64_t seed, const std::string& output) {
  std::vector<double> p;
  if (!weights.empty()) {
    for (const auto& w : split(weights)) p.push_back(std::stod(w));
    K = static_cast<Index>(p.size());
  } else {
    p = make_profile(parse_profile(profile), K, S);
  }
  const SupportModel model(p, S);
  const Theorem9Report t9 = verify_theorem9(model);

  Rng rng(seed);
  std::vector<long> hits(static_cast<std::size_t>(K), 0);
  for (long t = 0; t < draws; ++t)
    for (Index k : rejective_sample(model, rng)) ++hits[static_cast<std::size_t>(k)];
  std::vector<double> mc(hits.size());
  double max_z = 0;
  for (std::size_t k = 0; k < hits.size(); ++k) {
    mc[k] = static_cast<double>(hits[k]) / static_cast<double>(draws);
    const double pi = model.pi()[k];
    const double sigma = std::sqrt(pi * (1 - pi) / static_cast<double>(draws));
    max_z = std::max(max_z, std::abs(mc[k] - pi) / sigma);
  }

  json report{{"model", to_json(model)}, {"inclusion_inequalities", to_json(t9)}, {"draws", draws}, {"monte_carlo_pi", mc},
              {"max_z_score", max_z}, {"within_4_sigma", max_z <= 4.0}};
  std::cout << report.dump(2) << '\n';
  if (!output.empty()) {
    std::ofstream f(output);
    f << report.dump(2) << '\n';
  }
  return t9.all_hold() && max_z <= 4.0 ? 0 : 1;
}

int cmd_diagnose(const ConfigFlags& flags, Index draws) {
  const ExperimentConfig cfg = flags.resolve();
  const auto phi = make_generating_dictionary(cfg);
  const auto psi = make_initial_dictionary(cfg, phi);
  const auto model = cfg.support_model();
  const auto coeff = cfg.coefficient_model();
  const RegimeReport regime = evaluate_conditions(phi, psi, model, coeff, cfg.theorem_constants());
  const DistanceReport dist = distance_report(psi, phi, model);

  Rng rng(derive_seed(cfg.master_seed, 77));
  const double theta = 0.25;
  const double z_bound = dist.delta * std::sqrt(2 * regime.params.log_term);
  auto batch = generate_batch(phi, model, coeff, cfg.N_per_iter, rng);
  auto coding = code_batch(psi, batch, cfg.S, cfg.kappa);
  const auto diag = diagnostic_matrices(coding.code, batch, phi, dist, model, coeff);

  json report{{"regime", to_json(regime)},
              {"coherence_phi", coherence(phi)},
              {"coherence_psi", coherence(psi)},
              {"cross_coherence", cross_coherence(psi, phi)},
              {"weighted_norm_phi", weighted_norm(phi, model)},
              {"eps", dist.eps},
              {"delta", dist.delta},
              {"weighted_opnorm", dist.weighted_opnorm},
              {"conditioning_rate_phi", conditioning_rate(phi, model, draws, theta, rng)},
              {"conditioning_rate_psi", conditioning_rate(psi, model, draws, theta, rng)},
              {"z_norm_bound", z_bound},
              {"z_norm_rate", z_norm_rate(psi, phi, model, draws, z_bound, rng)},
              {"recovery_rate", coding.recovery_rate},
              {"rejections", coding.code.rejected_count},
              {"t_dev", diag.t_dev},
              {"a_dev", diag.a_dev},
              {"b_offdiag_ratio", diag.b_offdiag_ratio},
              {"support_model", to_json(model)}};
  std::cout << report.dump(2) << '\n';
  fs::create_directories(cfg.output_dir);
  std::ofstream(fs::path(cfg.output_dir) / "diagnose.json") << report.dump(2) << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dictionary learning experiments: MOD and ODL with thresholding under rejective sampling"};
  app.require_subcommand(1);

  ConfigFlags run_flags, sweep_flags, diag_flags;
  auto* run = app.add_subcommand("run", "run learning for each configured update kind");
  run_flags.attach(run);

  auto* sw = app.add_subcommand("sweep", "run the config over one axis of values");
  sweep_flags.attach(sw);
  std::string axis, values;
  sw->add_option("--axis", axis, "eps0 | support-profile | N | update-kind")->required();
  sw->add_option("--values", values, "comma separated axis values")->required();

  auto* vs = app.add_subcommand("verify-sampling", "exact vs Monte Carlo inclusion probabilities and inclusion inequality checks");
  Index vs_K = 48;
  int vs_S = 4;
  std::string vs_profile = "harmonic-capped", vs_weights, vs_output;
  long vs_draws = 100000;
  std::uint64_t vs_seed = 1;
  vs->add_option("--K", vs_K, "atom count");
  vs->add_option("--S", vs_S, "support size");
  vs->add_option("--profile", vs_profile, "uniform | linear-decay | harmonic-capped");
  vs->add_option("--weights", vs_weights, "explicit comma separated weights summing to S");
  vs->add_option("--draws", vs_draws, "Monte Carlo draws");
  vs->add_option("--seed", vs_seed, "RNG seed");
  vs->add_option("--output", vs_output, "also write the JSON report here");

  auto* dg = app.add_subcommand("diagnose", "theorem conditions and concentration diagnostics at initialisation");
  diag_flags.attach(dg);
  Index dg_draws = 20000;
  dg->add_option("--draws", dg_draws, "Monte Carlo draws for the conditioning and Z-norm rates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (sw->parsed()) return cmd_sweep(sweep_flags, axis, values);
    if (vs->parsed()) return cmd_verify_sampling(vs_K, vs_S, vs_profile, vs_weights, vs_draws, vs_seed, vs_output);
    if (dg->parsed()) return cmd_diagnose(diag_flags, dg_draws);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
