#pragma once

#include "dictlearn/coder.hpp"
#include "dictlearn/metrics.hpp"
#include "dictlearn/sampling.hpp"
#include "dictlearn/signals.hpp"
#include "dictlearn/theory.hpp"
#include "dictlearn/updates.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dictlearn {

enum class InitKind { PerturbEps, GivenFile, SeparatedRandom };

InitKind parse_init_kind(const std::string& name);
std::string to_string(InitKind kind);

/// Everything that defines one learning experiment. Field names double as the
/// JSON keys of a config file and as the long CLI flags.
struct ExperimentConfig {
  Index d = 128;
  Index K = 192;
  int S = 4;
  Index N_per_iter = 20000;
  int iterations = 30;

  DictionaryKind dictionary_kind = DictionaryKind::RandomUnitSphere;
  std::uint64_t dictionary_seed = 1;

  SupportProfile support_profile = SupportProfile::Uniform;

  double c_min = 0.9;
  double c_max = 1.0;
  CoefficientModel::Distribution coeff_distribution = CoefficientModel::Distribution::UniformInterval;

  InitKind init = InitKind::PerturbEps;
  double eps0 = 0.1;
  std::string init_file;
  bool match_init = false; // greedy atom matching for given-file initialisations

  std::vector<UpdateKind> update_kinds{UpdateKind::MOD};
  double kappa = kDefaultKappa;
  double delta_star = 0.01;
  double theorem_C = 42.0;
  double theorem_n = 130.0;

  std::uint64_t master_seed = 2024;
  std::string output_dir = "dictlearn_out";

  bool fixed_batch = false;   // reuse one batch; not theorem-conformant
  bool stop_at_target = true; // stop once delta < delta_star
  bool timing = false;        // write wall-clock times (breaks byte-identical outputs)
  int snapshot_every = 0;     // write dictionary_iter_XXXX.csv every n iterations

  CoefficientModel coefficient_model() const;
  SupportModel support_model() const;
  TheoremConstants theorem_constants() const;
  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Strict: unknown keys are an error; missing keys keep their defaults.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

ExperimentConfig load_config(const std::filesystem::path& file);

struct IterationRecord {
  int iter = 0;
  double eps = 0;
  double delta = 0;
  double weighted_opnorm = 0;
  double recovery_rate = 0;
  Index rejections = 0;
  double t_dev = 0;
  double max_atom_err = 0;
  double wall_ms = 0;
  std::vector<double> atom_errors;
  std::uint64_t batch_digest = 0;
};

struct GeometricFit {
  double rate = 0;           // per-iteration ratio exp(slope)
  std::size_t points = 0;    // pre-plateau points used
  std::optional<std::size_t> plateau_start;
  std::optional<double> plateau_level;
};

class InsufficientPointsError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPlateauRelChange = 0.05;
inline constexpr std::size_t kPlateauSpan = 3;
inline constexpr std::size_t kMinFitPoints = 4;

struct Plateau {
  std::size_t start = 0; // first plateau index in the series
  double level = 0;      // mean delta from start on
};

/// The plateau starts at the first t where the best delta so far improves by
/// less than 5% over the next 3 iterations.
std::optional<Plateau> detect_plateau(std::span<const double> deltas);

/// Least-squares fit of log(delta) over the points before the plateau.
/// Throws InsufficientPointsError with fewer than 4 pre-plateau points.
GeometricFit fit_geometric_rate(std::span<const double> deltas);
GeometricFit fit_geometric_rate(std::span<const IterationRecord> records);

struct RunSummary {
  UpdateKind update = UpdateKind::MOD;
  double init_eps = 0;
  double init_delta = 0;
  std::vector<IterationRecord> records;
  std::optional<Plateau> plateau;
  std::optional<GeometricFit> fit;
  std::string fit_error;
  RegimeReport init_regime;
  std::string termination;
  std::optional<int> iterations_to_target;
  double total_wall_ms = 0;
  Dictionary<double> final_dictionary;

  /// init_delta followed by the per-iteration deltas.
  std::vector<double> delta_series() const;
};

void to_json(nlohmann::json& j, const RunSummary& s);

/// psi_k = normalise(phi_k + r u_k), u_k a random unit vector orthogonal to
/// phi_k and r chosen so that ||psi_k - phi_k|| = eps0 exactly.
Dictionary<double> perturb_init(const Dictionary<double>& phi, double eps0, Rng& rng);

/// psi_k = normalise(phi_k + scale g_k / sqrt(d)) with Gaussian g_k, redrawn
/// until psi_k is closer to phi_k than to any other generating atom.
Dictionary<double> separated_random_init(const Dictionary<double>& phi, double scale, Rng& rng);

/// The generating dictionary of a config.
Dictionary<double> make_generating_dictionary(const ExperimentConfig& config);
Dictionary<double> make_initial_dictionary(const ExperimentConfig& config, const Dictionary<double>& phi);

/// Multi-iteration learning with a fresh batch per iteration (unless
/// fixed_batch). Writes outputs under `output_dir` when given.
RunSummary run_learning(const ExperimentConfig& config, UpdateKind kind,
                        const std::optional<std::filesystem::path>& output_dir = std::nullopt);
RunSummary run_learning(const ExperimentConfig& config);

enum class SweepAxis { Eps0, SupportProfile, N, UpdateKind };
SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepRow {
  std::string value;
  UpdateKind update = UpdateKind::MOD;
  int iterations_run = 0;
  std::optional<int> iterations_to_target;
  double final_delta = 0;
  std::optional<double> plateau_level;
  std::optional<double> rate;
  std::string termination;
};

/// Runs the template once per axis value (each update kind of the template,
/// or each value for the update-kind axis). Batch seeds are derived from the
/// master seed and the value index; the generating dictionary is shared.
std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::string>& values,
                            const std::optional<std::filesystem::path>& output_dir = std::nullopt);

// I/O helpers
std::string format_double(double v);
extern const char* const kIterationsCsvHeader;
void write_iterations_csv(const std::vector<IterationRecord>& records, const std::filesystem::path& file);
void write_trajectory(const RunSummary& summary, const std::filesystem::path& file);
void write_dictionary_csv(const Dictionary<double>& dict, const std::filesystem::path& file);
Dictionary<double> read_dictionary_csv(const std::filesystem::path& file);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& file);

std::uint64_t digest(const MatrixXd& m);

nlohmann::json to_json(const SupportModel& model);
nlohmann::json to_json(const RegimeReport& report);
nlohmann::json to_json(const Theorem9Report& report);

} // namespace dictlearn
