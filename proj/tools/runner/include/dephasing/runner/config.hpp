#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dephasing/model.hpp"

namespace dephasing::runner {

enum class ExperimentKind {
  kEvolve,
  kSteady,
  kCorrelationMap,
  kConcurrenceScan,
  kFockQuench,
  kRobustnessAA,
  kRobustnessInt,
};

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_kind(std::string_view name);
const std::vector<ExperimentKind>& all_kinds();

/// How the initial many-body state is built.
///   fock:       a site-occupation bitstring, site 1 leftmost
///   slater:     explicit single-particle mode indices (0-based, ascending energy)
///   ground:     the lowest n_particles modes of the single-particle Hamiltonian
///   even-modes: the lowest n_particles reflection-even modes
struct InitialState {
  enum class Kind { kFock, kSlater, kGround, kEvenModes };
  Kind kind = Kind::kGround;
  std::string bitstring;
  std::vector<int> modes;

  bool operator==(const InitialState&) const = default;
};

/// Either an explicit list of sample times or a uniform grid on [0, t_final].
struct TimeGrid {
  std::optional<std::vector<double>> times;
  double t_final = 10.0;
  std::size_t samples = 101;

  std::vector<double> resolve() const;
  bool operator==(const TimeGrid&) const = default;
};

struct QuenchBlock {
  double time = 31.1;
  double trap_amplitude = 2.0;
  bool auto_detect = false;
  double transient = 20.0;     // auto-detection and the no-steady-state window start here
  double pre_window = 2.0;     // pre-quench maximum is taken over [t_q - pre_window, t_q]
  double post_window = 20.0;   // post-quench mean over [t_q, t_q + post_window]

  bool operator==(const QuenchBlock&) const = default;
};

/// Parameter grid for robustness runs plus the (N, particles) grid of the concurrence scan.
struct ScanBlock {
  std::optional<std::vector<double>> values;
  double min = 0.0;
  double max = 0.5;
  std::size_t points = 8;
  std::vector<double> times;
  std::vector<int> sizes{3, 5, 7, 9};
  std::vector<int> fillings{1, 2, 3};
  int pair_i = 1;   // robustness pair; 0 selects the default (1, N)
  int pair_j = 0;

  std::vector<double> resolve_values() const;
  bool operator==(const ScanBlock&) const = default;
};

struct SolverBlock {
  std::string method = "adaptive";  // adaptive | exact
  double relative_tolerance = 1e-9;
  double absolute_tolerance = 1e-12;
  double steady_tolerance = 1e-9;
  std::optional<double> t_max;
  std::size_t threads = 0;  // 0 = hardware concurrency

  bool operator==(const SolverBlock&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kEvolve;
  LatticeSpec lattice;
  int particles = 1;
  InitialState initial;
  TimeGrid time;
  std::vector<std::string> observables;
  QuenchBlock quench;
  ScanBlock scan;
  SolverBlock solver;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Reference-scale defaults for each experiment kind.
ExperimentConfig default_config(ExperimentKind kind);

nlohmann::json to_json(const ExperimentConfig& config);

/// Strict parse: unknown keys and type mismatches are reported with their dotted path.
/// Missing keys fall back to default_config(kind).
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::string& path);

/// Applies "a.b.c=value" to a JSON document. The value is parsed as JSON when possible and
/// taken as a string otherwise. Fields that already hold a string stay strings.
void apply_override(nlohmann::json& document, std::string_view assignment);

}  // namespace dephasing::runner
