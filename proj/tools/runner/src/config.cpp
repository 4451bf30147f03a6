#include "dephasing/runner/config.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "dephasing/errors.hpp"
#include "dephasing/lindblad.hpp"

namespace dephasing::runner {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 7> kKindNames{{
    {ExperimentKind::kEvolve, "evolve"},
    {ExperimentKind::kSteady, "steady"},
    {ExperimentKind::kCorrelationMap, "correlation-map"},
    {ExperimentKind::kConcurrenceScan, "concurrence-scan"},
    {ExperimentKind::kFockQuench, "fock-quench"},
    {ExperimentKind::kRobustnessAA, "robustness-aa"},
    {ExperimentKind::kRobustnessInt, "robustness-int"},
}};

constexpr std::array<std::pair<InitialState::Kind, std::string_view>, 4> kInitialNames{{
    {InitialState::Kind::kFock, "fock"},
    {InitialState::Kind::kSlater, "slater"},
    {InitialState::Kind::kGround, "ground"},
    {InitialState::Kind::kEvenModes, "even-modes"},
}};

[[noreturn]] void field_error(const std::string& path, const std::string& message) {
  throw InvalidArgument("config field '" + path + "': " + message);
}

void reject_unknown(const json& object, const std::string& path, std::initializer_list<std::string_view> known) {
  if (!object.is_object()) field_error(path, "expected an object");
  for (const auto& [key, value] : object.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      field_error(path.empty() ? key : path + "." + key, "unknown field");
    }
  }
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

// Reads object[key] into `out` when present; type errors carry the dotted path.
template <typename T>
void read(const json& object, std::string_view key, const std::string& path, T& out) {
  const auto it = object.find(std::string(key));
  if (it == object.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception& e) {
    field_error(join(path, key), std::string("wrong type (") + e.what() + ")");
  }
}

template <typename T>
void read_optional(const json& object, std::string_view key, const std::string& path, std::optional<T>& out) {
  const auto it = object.find(std::string(key));
  if (it == object.end()) return;
  if (it->is_null()) {
    out.reset();
    return;
  }
  T value{};
  read(object, key, path, value);
  out = std::move(value);
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

void check(bool ok, const std::string& path, const std::string& message) {
  if (!ok) field_error(path, message);
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (!(v[k] > v[k - 1])) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ExperimentKind parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw InvalidArgument("unknown experiment kind '" + std::string(name) + "'");
}

const std::vector<ExperimentKind>& all_kinds() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> out;
    for (const auto& [k, n] : kKindNames) out.push_back(k);
    return out;
  }();
  return kinds;
}

std::vector<double> TimeGrid::resolve() const {
  if (times) return *times;
  return uniform_times(t_final, samples);
}

std::vector<double> ScanBlock::resolve_values() const {
  if (values) return *values;
  if (points == 1) return {min};
  std::vector<double> out(points);
  for (std::size_t k = 0; k < points; ++k) {
    out[k] = min + (max - min) * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return out;
}

void ExperimentConfig::validate() const {
  try {
    lattice.validate();
  } catch (const InvalidArgument& e) {
    // LatticeSpec messages lead with the offending member
    const std::string msg = e.what();
    const auto space = msg.find(' ');
    field_error("lattice." + msg.substr(0, space), space == std::string::npos ? msg : msg.substr(space + 1));
  }
  const int n = lattice.n_sites;
  check(particles >= 0 && particles <= n, "particles", "must lie in 0..lattice.n_sites");

  const bool needs_state = kind != ExperimentKind::kConcurrenceScan;
  if (needs_state) {
    switch (initial.kind) {
      case InitialState::Kind::kFock: {
        check(static_cast<int>(initial.bitstring.size()) == n, "initial.bitstring",
              "length must equal lattice.n_sites");
        const auto ones = std::count(initial.bitstring.begin(), initial.bitstring.end(), '1');
        const auto zeros = std::count(initial.bitstring.begin(), initial.bitstring.end(), '0');
        check(ones + zeros == n, "initial.bitstring", "may only contain '0' and '1'");
        check(ones == particles, "initial.bitstring", "number of '1' must equal particles");
        break;
      }
      case InitialState::Kind::kSlater: {
        check(static_cast<int>(initial.modes.size()) == particles, "initial.modes",
              "needs exactly `particles` entries");
        std::set<int> unique(initial.modes.begin(), initial.modes.end());
        check(unique.size() == initial.modes.size(), "initial.modes", "repeated mode index");
        for (int m : initial.modes) check(m >= 0 && m < n, "initial.modes", "mode index outside 0..N-1");
        break;
      }
      case InitialState::Kind::kEvenModes:
        check(particles <= (n + 1) / 2, "particles", "at most (N+1)/2 even modes exist");
        break;
      case InitialState::Kind::kGround:
        break;
    }
  }

  if (time.times) {
    check(!time.times->empty(), "time.times", "must not be empty");
    check(time.times->front() >= 0.0, "time.times", "must be non-negative");
    check(strictly_increasing(*time.times), "time.times", "must be strictly increasing");
  } else {
    check(time.t_final >= 0.0, "time.t_final", "must be non-negative");
    check(time.samples >= 1, "time.samples", "must be at least 1");
  }

  for (const auto& obs : observables) {
    static const std::set<std::string> plain{"purity", "trace", "charge", "residual", "number"};
    const bool ok = plain.count(obs) > 0 || obs.rfind("corr:", 0) == 0 || obs.rfind("n:", 0) == 0 ||
                    obs.rfind("concurrence:", 0) == 0;
    check(ok, "observables", "unknown observable '" + obs + "'");
  }

  if (kind == ExperimentKind::kFockQuench) {
    check(quench.auto_detect || quench.time >= 0.0, "quench.time", "must be non-negative");
    check(quench.trap_amplitude >= 0.0, "quench.trap_amplitude", "must be non-negative");
    check(quench.pre_window > 0.0, "quench.pre_window", "must be positive");
    check(quench.post_window > 0.0, "quench.post_window", "must be positive");
    check(quench.transient >= 0.0, "quench.transient", "must be non-negative");
  }

  if (kind == ExperimentKind::kRobustnessAA || kind == ExperimentKind::kRobustnessInt) {
    check(!scan.times.empty(), "scan.times", "must list at least one time");
    check(scan.times.front() >= 0.0 && strictly_increasing(scan.times), "scan.times",
          "must be non-negative and strictly increasing");
    if (scan.values) {
      check(!scan.values->empty(), "scan.values", "must not be empty");
      for (double v : *scan.values) check(v >= 0.0, "scan.values", "amplitudes must be non-negative");
    } else {
      check(scan.points >= 1, "scan.points", "must be at least 1");
      check(scan.min >= 0.0 && scan.max >= scan.min, "scan.min", "need 0 <= min <= max");
    }
    const int j = scan.pair_j == 0 ? n : scan.pair_j;
    check(scan.pair_i >= 1 && scan.pair_i < j && j <= n, "scan.pair_i", "need 1 <= pair_i < pair_j <= N");
  }

  if (kind == ExperimentKind::kConcurrenceScan) {
    check(!scan.sizes.empty(), "scan.sizes", "must not be empty");
    check(!scan.fillings.empty(), "scan.fillings", "must not be empty");
    for (int s : scan.sizes) check(s >= 3 && s % 2 == 1, "scan.sizes", "sizes must be odd and >= 3");
    for (int f : scan.fillings) check(f >= 1, "scan.fillings", "fillings must be >= 1");
  }

  check(solver.method == "adaptive" || solver.method == "exact", "solver.method",
        "must be 'adaptive' or 'exact'");
  check(solver.relative_tolerance > 0.0, "solver.relative_tolerance", "must be positive");
  check(solver.absolute_tolerance > 0.0, "solver.absolute_tolerance", "must be positive");
  check(solver.steady_tolerance > 0.0, "solver.steady_tolerance", "must be positive");
  if (solver.t_max) check(*solver.t_max > 0.0, "solver.t_max", "must be positive");
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::kEvolve:
      c.lattice.n_sites = 9;
      c.initial.kind = InitialState::Kind::kGround;
      c.time = {std::nullopt, 100.0, 1001};
      c.observables = {"corr:1:N", "corr:1:2", "n:c", "purity", "trace", "charge"};
      break;
    case ExperimentKind::kSteady:
      c.lattice.n_sites = 3;
      c.initial = {InitialState::Kind::kFock, "010", {}};
      break;
    case ExperimentKind::kCorrelationMap:
      c.lattice.n_sites = 9;
      c.initial.kind = InitialState::Kind::kGround;
      break;
    case ExperimentKind::kConcurrenceScan:
      c.initial.kind = InitialState::Kind::kEvenModes;
      break;
    case ExperimentKind::kFockQuench:
      c.lattice.n_sites = 7;
      c.particles = 4;
      c.initial = {InitialState::Kind::kFock, "1010101", {}};
      c.time = {std::nullopt, 60.0, 601};
      break;
    case ExperimentKind::kRobustnessAA:
      c.lattice.n_sites = 9;
      c.initial.kind = InitialState::Kind::kGround;
      c.scan.times = {100.0, 1000.0};
      break;
    case ExperimentKind::kRobustnessInt:
      c.lattice.n_sites = 7;
      c.particles = 4;
      c.initial = {InitialState::Kind::kFock, "1010101", {}};
      c.scan.times = {31.1};
      break;
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  json lattice{
      {"n_sites", c.lattice.n_sites},
      {"tunneling", c.lattice.tunneling},
      {"dephasing_gamma", c.lattice.dephasing_gamma},
      {"aa_amplitude", c.lattice.aa_amplitude},
      {"aa_frequency", c.lattice.aa_frequency},
      {"trap_amplitude", c.lattice.trap_amplitude},
      {"trap_center", optional_json(c.lattice.trap_center)},
      {"interaction", c.lattice.interaction},
  };
  std::string_view initial_kind;
  for (const auto& [k, name] : kInitialNames) {
    if (k == c.initial.kind) initial_kind = name;
  }
  return json{
      {"experiment", std::string(to_string(c.kind))},
      {"lattice", lattice},
      {"particles", c.particles},
      {"initial_state", {{"kind", initial_kind}, {"bitstring", c.initial.bitstring}, {"modes", c.initial.modes}}},
      {"time", {{"times", optional_json(c.time.times)}, {"t_final", c.time.t_final}, {"samples", c.time.samples}}},
      {"observables", c.observables},
      {"quench",
       {{"time", c.quench.time},
        {"trap_amplitude", c.quench.trap_amplitude},
        {"auto_detect", c.quench.auto_detect},
        {"transient", c.quench.transient},
        {"pre_window", c.quench.pre_window},
        {"post_window", c.quench.post_window}}},
      {"scan",
       {{"values", optional_json(c.scan.values)},
        {"min", c.scan.min},
        {"max", c.scan.max},
        {"points", c.scan.points},
        {"times", c.scan.times},
        {"sizes", c.scan.sizes},
        {"fillings", c.scan.fillings},
        {"pair_i", c.scan.pair_i},
        {"pair_j", c.scan.pair_j}}},
      {"solver",
       {{"method", c.solver.method},
        {"relative_tolerance", c.solver.relative_tolerance},
        {"absolute_tolerance", c.solver.absolute_tolerance},
        {"steady_tolerance", c.solver.steady_tolerance},
        {"t_max", optional_json(c.solver.t_max)},
        {"threads", c.solver.threads}}},
  };
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j, "", {"experiment", "lattice", "particles", "initial_state", "time", "observables", "quench",
                         "scan", "solver"});
  if (!j.contains("experiment")) field_error("experiment", "required");
  std::string kind_name;
  read(j, "experiment", "", kind_name);
  ExperimentKind kind;
  try {
    kind = parse_kind(kind_name);
  } catch (const InvalidArgument& e) {
    field_error("experiment", e.what());
  }
  ExperimentConfig c = default_config(kind);

  if (const auto it = j.find("lattice"); it != j.end()) {
    const std::string p = "lattice";
    reject_unknown(*it, p, {"n_sites", "tunneling", "dephasing_gamma", "aa_amplitude", "aa_frequency",
                            "trap_amplitude", "trap_center", "interaction"});
    read(*it, "n_sites", p, c.lattice.n_sites);
    read(*it, "tunneling", p, c.lattice.tunneling);
    read(*it, "dephasing_gamma", p, c.lattice.dephasing_gamma);
    read(*it, "aa_amplitude", p, c.lattice.aa_amplitude);
    read(*it, "aa_frequency", p, c.lattice.aa_frequency);
    read(*it, "trap_amplitude", p, c.lattice.trap_amplitude);
    read_optional(*it, "trap_center", p, c.lattice.trap_center);
    read(*it, "interaction", p, c.lattice.interaction);
  }
  read(j, "particles", "", c.particles);

  if (const auto it = j.find("initial_state"); it != j.end()) {
    const std::string p = "initial_state";
    reject_unknown(*it, p, {"kind", "bitstring", "modes"});
    if (it->contains("kind")) {
      std::string name;
      read(*it, "kind", p, name);
      bool found = false;
      for (const auto& [k, n] : kInitialNames) {
        if (n == name) {
          c.initial.kind = k;
          found = true;
        }
      }
      if (!found) field_error("initial_state.kind", "unknown kind '" + name + "'");
    }
    read(*it, "bitstring", p, c.initial.bitstring);
    read(*it, "modes", p, c.initial.modes);
  }

  if (const auto it = j.find("time"); it != j.end()) {
    const std::string p = "time";
    reject_unknown(*it, p, {"times", "t_final", "samples"});
    read_optional(*it, "times", p, c.time.times);
    read(*it, "t_final", p, c.time.t_final);
    read(*it, "samples", p, c.time.samples);
  }
  read(j, "observables", "", c.observables);

  if (const auto it = j.find("quench"); it != j.end()) {
    const std::string p = "quench";
    reject_unknown(*it, p, {"time", "trap_amplitude", "auto_detect", "transient", "pre_window", "post_window"});
    read(*it, "time", p, c.quench.time);
    read(*it, "trap_amplitude", p, c.quench.trap_amplitude);
    read(*it, "auto_detect", p, c.quench.auto_detect);
    read(*it, "transient", p, c.quench.transient);
    read(*it, "pre_window", p, c.quench.pre_window);
    read(*it, "post_window", p, c.quench.post_window);
  }

  if (const auto it = j.find("scan"); it != j.end()) {
    const std::string p = "scan";
    reject_unknown(*it, p, {"values", "min", "max", "points", "times", "sizes", "fillings", "pair_i", "pair_j"});
    read_optional(*it, "values", p, c.scan.values);
    read(*it, "min", p, c.scan.min);
    read(*it, "max", p, c.scan.max);
    read(*it, "points", p, c.scan.points);
    read(*it, "times", p, c.scan.times);
    read(*it, "sizes", p, c.scan.sizes);
    read(*it, "fillings", p, c.scan.fillings);
    read(*it, "pair_i", p, c.scan.pair_i);
    read(*it, "pair_j", p, c.scan.pair_j);
  }

  if (const auto it = j.find("solver"); it != j.end()) {
    const std::string p = "solver";
    reject_unknown(*it, p, {"method", "relative_tolerance", "absolute_tolerance", "steady_tolerance", "t_max",
                            "threads"});
    read(*it, "method", p, c.solver.method);
    read(*it, "relative_tolerance", p, c.solver.relative_tolerance);
    read(*it, "absolute_tolerance", p, c.solver.absolute_tolerance);
    read(*it, "steady_tolerance", p, c.solver.steady_tolerance);
    read_optional(*it, "t_max", p, c.solver.t_max);
    read(*it, "threads", p, c.solver.threads);
  }

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void apply_override(json& document, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw InvalidArgument("override '" + std::string(assignment) + "' must look like key.path=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &document;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    if (!node->is_object()) throw InvalidArgument("override '" + key + "': '" + path[k] + "' is not an object");
    node = &(*node)[path[k]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw InvalidArgument("override '" + key + "': parent is not an object");
  // "initial_state.bitstring=0110" must stay a string even though it parses as a number
  const auto existing = node->find(path.back());
  if (existing != node->end() && existing->is_string() && !value.is_string()) value = raw;
  (*node)[path.back()] = value;
}

}  // namespace dephasing::runner
