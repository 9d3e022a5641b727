#include "dictlearn/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace dictlearn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Seed streams derived from the master seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kFixedBatchStream = 2;
constexpr std::uint64_t kBatchStreamBase = 1000;

std::string distribution_name(CoefficientModel::Distribution d) {
  return d == CoefficientModel::Distribution::Constant ? "constant" : "uniform-on-interval";
}

CoefficientModel::Distribution parse_distribution(const std::string& name) {
  if (name == "uniform-on-interval" || name == "uniform") return CoefficientModel::Distribution::UniformInterval;
  if (name == "constant") return CoefficientModel::Distribution::Constant;
  throw std::invalid_argument("unknown coefficient distribution '" + name + "'");
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + file.string() + "' for writing");
  return out;
}

} // namespace

InitKind parse_init_kind(const std::string& name) {
  if (name == "perturb-eps") return InitKind::PerturbEps;
  if (name == "given-file") return InitKind::GivenFile;
  if (name == "separated-random") return InitKind::SeparatedRandom;
  throw std::invalid_argument("unknown init kind '" + name + "'");
}

std::string to_string(InitKind kind) {
  switch (kind) {
  case InitKind::PerturbEps: return "perturb-eps";
  case InitKind::GivenFile: return "given-file";
  case InitKind::SeparatedRandom: return "separated-random";
  }
  return "unknown";
}

CoefficientModel ExperimentConfig::coefficient_model() const {
  CoefficientModel m{c_min, c_max, coeff_distribution};
  m.validate();
  return m;
}

SupportModel ExperimentConfig::support_model() const { return SupportModel(make_profile(support_profile, K, S), S); }

TheoremConstants ExperimentConfig::theorem_constants() const {
  TheoremConstants c;
  c.C = theorem_C;
  c.n = theorem_n;
  c.kappa2 = kappa * kappa;
  c.delta_star = delta_star;
  return c;
}

void ExperimentConfig::validate() const {
  if (d < 1 || K < 1 || S < 1 || S > K || N_per_iter < 1 || iterations < 0)
    throw std::invalid_argument("config: need d, K, N_per_iter >= 1, 1 <= S <= K and iterations >= 0");
  if (!(kappa > 1)) throw std::invalid_argument("config: kappa must exceed 1");
  if (!(delta_star > 0)) throw std::invalid_argument("config: delta_star must be positive");
  if (init == InitKind::PerturbEps && !(eps0 >= 0 && eps0 < std::numbers::sqrt2))
    throw std::invalid_argument("config: eps0 must lie in [0, sqrt(2))");
  if (init == InitKind::GivenFile && init_file.empty()) throw std::invalid_argument("config: init_file required");
  if (update_kinds.empty()) throw std::invalid_argument("config: at least one update kind required");
  if (snapshot_every < 0) throw std::invalid_argument("config: snapshot_every must be >= 0");
  coefficient_model();
}

void to_json(json& j, const ExperimentConfig& c) {
  json kinds = json::array();
  for (auto k : c.update_kinds) kinds.push_back(to_string(k));
  j = json{{"d", c.d},
           {"K", c.K},
           {"S", c.S},
           {"N_per_iter", c.N_per_iter},
           {"iterations", c.iterations},
           {"dictionary_kind", to_string(c.dictionary_kind)},
           {"dictionary_seed", c.dictionary_seed},
           {"support_profile", to_string(c.support_profile)},
           {"c_min", c.c_min},
           {"c_max", c.c_max},
           {"coeff_distribution", distribution_name(c.coeff_distribution)},
           {"init", to_string(c.init)},
           {"eps0", c.eps0},
           {"init_file", c.init_file},
           {"match_init", c.match_init},
           {"update_kinds", kinds},
           {"kappa", c.kappa},
           {"delta_star", c.delta_star},
           {"theorem_C", c.theorem_C},
           {"theorem_n", c.theorem_n},
           {"master_seed", c.master_seed},
           {"output_dir", c.output_dir},
           {"fixed_batch", c.fixed_batch},
           {"stop_at_target", c.stop_at_target},
           {"timing", c.timing},
           {"snapshot_every", c.snapshot_every}};
}

void from_json(const json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "d") c.d = value.get<Index>();
    else if (key == "K") c.K = value.get<Index>();
    else if (key == "S") c.S = value.get<int>();
    else if (key == "N_per_iter") c.N_per_iter = value.get<Index>();
    else if (key == "iterations") c.iterations = value.get<int>();
    else if (key == "dictionary_kind") c.dictionary_kind = parse_dictionary_kind(value.get<std::string>());
    else if (key == "dictionary_seed") c.dictionary_seed = value.get<std::uint64_t>();
    else if (key == "support_profile") c.support_profile = parse_profile(value.get<std::string>());
    else if (key == "c_min") c.c_min = value.get<double>();
    else if (key == "c_max") c.c_max = value.get<double>();
    else if (key == "coeff_distribution") c.coeff_distribution = parse_distribution(value.get<std::string>());
    else if (key == "init") c.init = parse_init_kind(value.get<std::string>());
    else if (key == "eps0") c.eps0 = value.get<double>();
    else if (key == "init_file") c.init_file = value.get<std::string>();
    else if (key == "match_init") c.match_init = value.get<bool>();
    else if (key == "update_kinds") {
      c.update_kinds.clear();
      if (value.is_string())
        c.update_kinds.push_back(parse_update_kind(value.get<std::string>()));
      else
        for (const auto& k : value) c.update_kinds.push_back(parse_update_kind(k.get<std::string>()));
    } else if (key == "kappa") c.kappa = value.get<double>();
    else if (key == "delta_star") c.delta_star = value.get<double>();
    else if (key == "theorem_C") c.theorem_C = value.get<double>();
    else if (key == "theorem_n") c.theorem_n = value.get<double>();
    else if (key == "master_seed") c.master_seed = value.get<std::uint64_t>();
    else if (key == "output_dir") c.output_dir = value.get<std::string>();
    else if (key == "fixed_batch") c.fixed_batch = value.get<bool>();
    else if (key == "stop_at_target") c.stop_at_target = value.get<bool>();
    else if (key == "timing") c.timing = value.get<bool>();
    else if (key == "snapshot_every") c.snapshot_every = value.get<int>();
    else throw std::invalid_argument("config: unknown field '" + key + "'");
  }
}

ExperimentConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config '" + file.string() + "'");
  ExperimentConfig c;
  from_json(json::parse(in), c);
  return c;
}

std::optional<Plateau> detect_plateau(std::span<const double> deltas) {
  // Running minimum, so that noise on the finite-N floor cannot mask the plateau.
  std::vector<double> best(deltas.begin(), deltas.end());
  for (std::size_t t = 1; t < best.size(); ++t) best[t] = std::min(best[t], best[t - 1]);
  for (std::size_t t = 0; t + kPlateauSpan < best.size(); ++t) {
    if (best[t + kPlateauSpan] >= (1 - kPlateauRelChange) * best[t]) {
      double level = 0;
      for (std::size_t u = t; u < deltas.size(); ++u) level += deltas[u];
      return Plateau{t, level / static_cast<double>(deltas.size() - t)};
    }
  }
  return std::nullopt;
}

GeometricFit fit_geometric_rate(std::span<const double> deltas) {
  GeometricFit fit;
  std::size_t end = deltas.size();
  if (const auto plateau = detect_plateau(deltas)) {
    fit.plateau_start = plateau->start;
    fit.plateau_level = plateau->level;
    end = plateau->start;
  }
  if (end < kMinFitPoints)
    throw InsufficientPointsError("fit_geometric_rate: only " + std::to_string(end) + " pre-plateau point(s), need " +
                                  std::to_string(kMinFitPoints));
  for (std::size_t t = 0; t < end; ++t)
    if (!(deltas[t] > 0)) throw InsufficientPointsError("fit_geometric_rate: non-positive delta in the fit window");

  double mean_t = 0, mean_y = 0;
  for (std::size_t t = 0; t < end; ++t) {
    mean_t += static_cast<double>(t);
    mean_y += std::log(deltas[t]);
  }
  mean_t /= static_cast<double>(end);
  mean_y /= static_cast<double>(end);
  double sxy = 0, sxx = 0;
  for (std::size_t t = 0; t < end; ++t) {
    const double dt = static_cast<double>(t) - mean_t;
    sxy += dt * (std::log(deltas[t]) - mean_y);
    sxx += dt * dt;
  }
  fit.rate = std::exp(sxy / sxx);
  fit.points = end;
  return fit;
}

GeometricFit fit_geometric_rate(std::span<const IterationRecord> records) {
  std::vector<double> deltas;
  deltas.reserve(records.size());
  for (const auto& r : records) deltas.push_back(r.delta);
  return fit_geometric_rate(std::span<const double>(deltas));
}

std::vector<double> RunSummary::delta_series() const {
  std::vector<double> out{init_delta};
  for (const auto& r : records) out.push_back(r.delta);
  return out;
}

Dictionary<double> perturb_init(const Dictionary<double>& phi, double eps0, Rng& rng) {
  if (!(eps0 >= 0 && eps0 < std::numbers::sqrt2)) throw std::invalid_argument("perturb_init: eps0 outside [0, sqrt 2)");
  if (eps0 == 0) return phi;
  if (phi.d() < 2) throw DimensionError("perturb_init: need d >= 2 to perturb atoms");
  const double cos_t = 1 - eps0 * eps0 / 2;
  const double sin_t = std::sqrt(std::max(0.0, 1 - cos_t * cos_t));
  std::normal_distribution<double> normal;
  MatrixXd out(phi.d(), phi.K());
  for (Index k = 0; k < phi.K(); ++k) {
    const auto atom = phi.atom(k);
    VectorXd u(phi.d());
    do {
      for (Index i = 0; i < phi.d(); ++i) u[i] = normal(rng);
      u -= atom.dot(u) * atom;
    } while (u.norm() < 1e-8);
    u.normalize();
    out.col(k) = cos_t * atom + sin_t * u;
    out.col(k).normalize();
  }
  return Dictionary<double>(std::move(out));
}

Dictionary<double> separated_random_init(const Dictionary<double>& phi, double scale, Rng& rng) {
  if (!(scale >= 0)) throw std::invalid_argument("separated_random_init: scale must be non-negative");
  std::normal_distribution<double> normal;
  const double step = scale / std::sqrt(static_cast<double>(phi.d()));
  MatrixXd out(phi.d(), phi.K());
  for (Index k = 0; k < phi.K(); ++k) {
    VectorXd v;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) throw std::runtime_error("separated_random_init: cannot separate atom " + std::to_string(k));
      v = phi.atom(k);
      for (Index i = 0; i < phi.d(); ++i) v[i] += step * normal(rng);
      v.normalize();
      VectorXd ip = (phi.atoms().transpose() * v).cwiseAbs();
      const double own = ip[k];
      ip[k] = 0;
      if (own > ip.maxCoeff()) break;
    }
    if (phi.atom(k).dot(v) < 0) v = -v;
    out.col(k) = v;
  }
  return Dictionary<double>(std::move(out));
}

Dictionary<double> make_generating_dictionary(const ExperimentConfig& config) {
  Rng rng(config.dictionary_seed);
  return generate_dictionary<double>(config.d, config.K, config.dictionary_kind, rng);
}

Dictionary<double> make_initial_dictionary(const ExperimentConfig& config, const Dictionary<double>& phi) {
  Rng rng(derive_seed(config.master_seed, kInitStream));
  switch (config.init) {
  case InitKind::PerturbEps: return perturb_init(phi, config.eps0, rng);
  case InitKind::SeparatedRandom: return separated_random_init(phi, config.eps0, rng);
  case InitKind::GivenFile: {
    Dictionary<double> psi = read_dictionary_csv(config.init_file);
    if (psi.d() != phi.d() || psi.K() != phi.K()) throw DimensionError("init_file: dictionary shape differs from d x K");
    if (config.match_init) return greedy_match(psi, phi);
    return normalize_and_align(psi.atoms(), psi, &phi);
  }
  }
  throw std::logic_error("unreachable init kind");
}

RunSummary run_learning(const ExperimentConfig& config, UpdateKind kind, const std::optional<fs::path>& output_dir) {
  using Clock = std::chrono::steady_clock;
  config.validate();
  const auto run_start = Clock::now();

  const Dictionary<double> phi = make_generating_dictionary(config);
  const SupportModel model = config.support_model();
  const CoefficientModel coeff = config.coefficient_model();
  Dictionary<double> psi = make_initial_dictionary(config, phi);

  RunSummary summary;
  summary.update = kind;
  DistanceReport dist = distance_report(psi, phi, model);
  summary.init_eps = dist.eps;
  summary.init_delta = dist.delta;
  summary.init_regime = evaluate_conditions(phi, psi, model, coeff, config.theorem_constants());
  summary.termination = "iteration budget exhausted";

  if (output_dir) fs::create_directories(*output_dir);

  std::optional<SignalBatch<double>> fixed;
  if (config.fixed_batch) {
    Rng rng(derive_seed(config.master_seed, kFixedBatchStream));
    fixed = generate_batch(phi, model, coeff, config.N_per_iter, rng);
  }

  for (int t = 1; t <= config.iterations; ++t) {
    SignalBatch<double> fresh;
    if (!fixed) {
      Rng rng(derive_seed(config.master_seed, kBatchStreamBase + static_cast<std::uint64_t>(t)));
      fresh = generate_batch(phi, model, coeff, config.N_per_iter, rng);
    }
    const SignalBatch<double>& batch = fixed ? *fixed : fresh;

    const auto start = Clock::now();
    IterationResult<double> step;
    try {
      step = run_iteration(psi, batch, config.S, config.kappa, kind, &phi);
    } catch (const AtomStarvationError& e) {
      summary.termination = "atom starvation at iter " + std::to_string(t) + ": " + e.what();
      break;
    } catch (const RankDeficientError& e) {
      summary.termination = "atom starvation at iter " + std::to_string(t) + ": " + e.what();
      break;
    }
    const auto diag = diagnostic_matrices(step.code, batch, phi, dist, model, coeff);
    psi = std::move(step.dictionary);
    dist = distance_report(psi, phi, model);
    const auto stop = Clock::now();

    IterationRecord rec;
    rec.iter = t;
    rec.eps = dist.eps;
    rec.delta = dist.delta;
    rec.weighted_opnorm = dist.weighted_opnorm;
    rec.recovery_rate = step.diagnostics.recovery_rate;
    rec.rejections = step.diagnostics.rejected_count;
    rec.t_dev = diag.t_dev;
    rec.max_atom_err = dist.atom_errors.maxCoeff();
    rec.atom_errors.assign(dist.atom_errors.data(), dist.atom_errors.data() + dist.atom_errors.size());
    rec.wall_ms = config.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
    rec.batch_digest = digest(batch.Y);
    summary.records.push_back(std::move(rec));

    if (output_dir && config.snapshot_every > 0 && t % config.snapshot_every == 0) {
      std::ostringstream name;
      name << "dictionary_iter_" << std::setw(4) << std::setfill('0') << t << ".csv";
      write_dictionary_csv(psi, *output_dir / name.str());
    }

    if (dist.delta < config.delta_star && !summary.iterations_to_target) {
      summary.iterations_to_target = t;
      if (config.stop_at_target) {
        summary.termination = "target reached at iter " + std::to_string(t);
        break;
      }
    }
  }

  summary.final_dictionary = psi;
  const auto series = summary.delta_series();
  summary.plateau = detect_plateau(series);
  try {
    summary.fit = fit_geometric_rate(std::span<const double>(series));
  } catch (const InsufficientPointsError& e) {
    summary.fit_error = e.what();
  }
  if (config.timing) summary.total_wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - run_start).count();

  if (output_dir) {
    write_iterations_csv(summary.records, *output_dir / "iterations.csv");
    write_trajectory(summary, *output_dir / "trajectory.dat");
    write_dictionary_csv(summary.final_dictionary, *output_dir / "dictionary_final.csv");
    json cfg;
    to_json(cfg, config);
    open_out(*output_dir / "config.json") << cfg.dump(2) << '\n';
    json js;
    to_json(js, summary);
    open_out(*output_dir / "summary.json") << js.dump(2) << '\n';
  }
  return summary;
}

RunSummary run_learning(const ExperimentConfig& config) {
  if (config.update_kinds.size() != 1) throw std::invalid_argument("run_learning: config must name exactly one update kind");
  return run_learning(config, config.update_kinds.front());
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "eps0") return SweepAxis::Eps0;
  if (name == "support-profile") return SweepAxis::SupportProfile;
  if (name == "N") return SweepAxis::N;
  if (name == "update-kind") return SweepAxis::UpdateKind;
  throw std::invalid_argument("unknown sweep axis '" + name + "'");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
  case SweepAxis::Eps0: return "eps0";
  case SweepAxis::SupportProfile: return "support-profile";
  case SweepAxis::N: return "N";
  case SweepAxis::UpdateKind: return "update-kind";
  }
  return "unknown";
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::string>& values,
                            const std::optional<fs::path>& output_dir) {
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig cfg = base;
    cfg.master_seed = derive_seed(base.master_seed, i);
    std::vector<UpdateKind> kinds = base.update_kinds;
    switch (axis) {
    case SweepAxis::Eps0: cfg.eps0 = std::stod(values[i]); break;
    case SweepAxis::SupportProfile: cfg.support_profile = parse_profile(values[i]); break;
    case SweepAxis::N: cfg.N_per_iter = std::stol(values[i]); break;
    case SweepAxis::UpdateKind: kinds = {parse_update_kind(values[i])}; break;
    }
    for (UpdateKind kind : kinds) {
      std::optional<fs::path> dir;
      if (output_dir) dir = *output_dir / (to_string(axis) + "_" + std::to_string(i)) / to_string(kind);
      const RunSummary s = run_learning(cfg, kind, dir);
      SweepRow row;
      row.value = values[i];
      row.update = kind;
      row.iterations_run = static_cast<int>(s.records.size());
      row.iterations_to_target = s.iterations_to_target;
      row.final_delta = s.records.empty() ? s.init_delta : s.records.back().delta;
      if (s.plateau) row.plateau_level = s.plateau->level;
      if (s.fit) row.rate = s.fit->rate;
      row.termination = s.termination;
      rows.push_back(std::move(row));
    }
  }
  if (output_dir) write_sweep_csv(rows, *output_dir / "sweep.csv");
  return rows;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const char* const kIterationsCsvHeader = "iter,eps,delta,weighted_opnorm,recovery_rate,rejections,t_dev,max_atom_err,wall_ms";

void write_iterations_csv(const std::vector<IterationRecord>& records, const fs::path& file) {
  auto out = open_out(file);
  out << kIterationsCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.iter << ',' << format_double(r.eps) << ',' << format_double(r.delta) << ','
        << format_double(r.weighted_opnorm) << ',' << format_double(r.recovery_rate) << ',' << r.rejections << ','
        << format_double(r.t_dev) << ',' << format_double(r.max_atom_err) << ',' << format_double(r.wall_ms) << '\n';
  }
}

void write_trajectory(const RunSummary& summary, const fs::path& file) {
  auto out = open_out(file);
  const auto series = summary.delta_series();
  for (std::size_t t = 0; t < series.size(); ++t) out << t << ' ' << format_double(std::log10(series[t])) << '\n';
}

void write_dictionary_csv(const Dictionary<double>& dict, const fs::path& file) {
  auto out = open_out(file);
  const auto& a = dict.atoms();
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index k = 0; k < a.cols(); ++k) {
      if (k) out << ',';
      out << format_double(a(i, k));
    }
    out << '\n';
  }
}

Dictionary<double> read_dictionary_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open dictionary '" + file.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("dictionary csv: ragged rows in '" + file.string() + "'");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("dictionary csv: empty file '" + file.string() + "'");
  MatrixXd a(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index k = 0; k < a.cols(); ++k) a(i, k) = rows[i][k];
  // Files we wrote ourselves are already unit norm; keep them bit-exact.
  const bool unit = ((a.colwise().norm().array() - 1).abs() <= unit_norm_tol<double>()).all();
  return unit ? Dictionary<double>(std::move(a)) : Dictionary<double>::normalized(std::move(a));
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const fs::path& file) {
  auto out = open_out(file);
  out << "value,update,iterations_run,iterations_to_target,final_delta,plateau_level,rate,termination\n";
  for (const auto& r : rows) {
    out << r.value << ',' << to_string(r.update) << ',' << r.iterations_run << ','
        << (r.iterations_to_target ? std::to_string(*r.iterations_to_target) : "") << ','
        << format_double(r.final_delta) << ',' << (r.plateau_level ? format_double(*r.plateau_level) : "") << ','
        << (r.rate ? format_double(*r.rate) : "") << ",\"" << r.termination << "\"\n";
  }
}

std::uint64_t digest(const MatrixXd& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
  for (std::size_t i = 0; i < static_cast<std::size_t>(m.size()) * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

json to_json(const SupportModel& model) {
  return json{{"K", model.K()}, {"S", model.S()}, {"p", model.p()}, {"pi", model.pi()}};
}

namespace {
json check_json(const ConditionCheck& c) {
  return json{{"lhs", c.lhs}, {"rhs", c.rhs}, {"margin", c.margin}, {"holds", c.holds}};
}
} // namespace

json to_json(const RegimeReport& r) {
  const auto& p = r.params;
  return json{{"C", p.constants.C},
              {"n", p.constants.n},
              {"kappa2", p.constants.kappa2},
              {"delta_star", p.constants.delta_star},
              {"gamma", p.gamma},
              {"alpha_min", p.alpha_min},
              {"pi_min", p.pi_min},
              {"rho", p.rho},
              {"nu", p.nu},
              {"delta_circ", p.delta_circ},
              {"stable_target", p.stable_target()},
              {"delta", r.delta},
              {"generating_condition", check_json(r.generating)},
              {"regime1", check_json(r.regime1)},
              {"regime2", check_json(r.regime2)},
              {"regime", to_string(r.regime)},
              {"sample_size_hint", r.sample_size_hint},
              {"regime2_alpha_bound", r.regime2_alpha_bound}};
}

json to_json(const Theorem9Report& r) {
  return json{{"a_holds", r.a_holds}, {"a_min_slack", r.a_min_slack}, {"b_holds", r.b_holds},
              {"b_min_slack", r.b_min_slack}, {"c_holds", r.c_holds}, {"c_min_slack", r.c_min_slack},
              {"violations", r.violations}};
}

void to_json(json& j, const RunSummary& s) {
  json records = json::array();
  for (const auto& r : s.records) {
    records.push_back(json{{"iter", r.iter},
                           {"eps", r.eps},
                           {"delta", r.delta},
                           {"weighted_opnorm", r.weighted_opnorm},
                           {"recovery_rate", r.recovery_rate},
                           {"rejections", r.rejections},
                           {"t_dev", r.t_dev},
                           {"max_atom_err", r.max_atom_err},
                           {"wall_ms", r.wall_ms},
                           {"batch_digest", r.batch_digest},
                           {"atom_errors", r.atom_errors}});
  }
  j = json{{"update", to_string(s.update)},
           {"init_eps", s.init_eps},
           {"init_delta", s.init_delta},
           {"records", records},
           {"rate", s.fit ? json(s.fit->rate) : json(nullptr)},
           {"fit_points", s.fit ? json(s.fit->points) : json(nullptr)},
           {"plateau_start", s.plateau ? json(s.plateau->start) : json(nullptr)},
           {"plateau_level", s.plateau ? json(s.plateau->level) : json(nullptr)},
           {"fit_error", s.fit_error},
           {"init_regime", to_json(s.init_regime)},
           {"termination", s.termination},
           {"iterations_to_target", s.iterations_to_target ? json(*s.iterations_to_target) : json(nullptr)},
           {"total_wall_ms", s.total_wall_ms}};
}

} // namespace dictlearn
