// dephase: run one experiment, write CSV + summary.json, optionally plot-ready panels.
//
//   dephase steady --config configs/steady_n3.json --out out/steady
//   dephase fock-quench --set quench.auto_detect=true --plot
//   dephase defaults concurrence-scan > scan.json

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dephasing/errors.hpp"
#include "dephasing/runner/runner.hpp"

namespace dr = dephasing::runner;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInvariantFailed = 1, kSolverFailed = 2, kBadConfig = 3 };

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  bool plot = false;
  bool quiet = false;
};

int run_kind(dr::ExperimentKind kind, const Options& o) {
  json doc;
  dr::ExperimentConfig config;
  try {
    if (o.config.empty()) {
      doc = dr::to_json(dr::default_config(kind));
    } else {
      std::ifstream in(o.config);
      if (!in) throw dephasing::InvalidArgument("cannot open config " + o.config);
      doc = json::parse(in);
      if (doc.contains("experiment") && doc["experiment"] != std::string(dr::to_string(kind))) {
        throw dephasing::InvalidArgument("config describes '" + doc["experiment"].get<std::string>() +
                                         "' but the subcommand is '" + std::string(dr::to_string(kind)) + "'");
      }
      doc["experiment"] = std::string(dr::to_string(kind));
    }
    for (const auto& a : o.overrides) dr::apply_override(doc, a);
    config = dr::config_from_json(doc);
    config.validate();
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const dephasing::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kBadConfig;
  }

  dr::RunResult result;
  try {
    result = dr::run(config);
  } catch (const dephasing::NonConvergence& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kSolverFailed;
  } catch (const dephasing::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailed;
  }

  const std::string out = o.out.empty() ? "out/" + std::string(dr::to_string(kind)) : o.out;
  auto files = dr::write_outputs(result, out);
  if (o.plot) {
    const auto panels = dr::emit_plot_data(result, out);
    files.insert(files.end(), panels.begin(), panels.end());
  }
  if (!o.quiet) {
    for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
    std::cout << result.results.dump(2) << "\n";
  }
  for (const auto& c : result.invariants) {
    if (!c.passed) std::cerr << "invariant violated: " << c.name << " = " << c.value << " (tolerance " << c.tolerance << ")\n";
  }
  return result.invariants_ok() ? kOk : kInvariantFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dephasing-driven entanglement experiments on a fermionic chain"};
  app.require_subcommand(1);

  Options opts;
  int status = kOk;
  for (const auto kind : dr::all_kinds()) {
    const std::string name(dr::to_string(kind));
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("-c,--config", opts.config, "JSON config (defaults for the kind when omitted)")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", opts.out, "output directory (default out/<kind>)");
    sub->add_option("-s,--set", opts.overrides, "override a config field, e.g. lattice.n_sites=7");
    sub->add_flag("-p,--plot", opts.plot, "also write plot-ready panel CSVs");
    sub->add_flag("-q,--quiet", opts.quiet, "no stdout report");
    sub->callback([kind, &opts, &status] { status = run_kind(kind, opts); });
  }

  std::string defaults_kind;
  auto* defaults = app.add_subcommand("defaults", "print the default config of a kind");
  defaults->add_option("kind", defaults_kind)->required();
  defaults->callback([&] {
    try {
      std::cout << dr::to_json(dr::default_config(dr::parse_kind(defaults_kind))).dump(2) << "\n";
    } catch (const dephasing::Error& e) {
      std::cerr << "config error: " << e.what() << "\n";
      status = kBadConfig;
    }
  });

  CLI11_PARSE(app, argc, argv);
  return status;
}
