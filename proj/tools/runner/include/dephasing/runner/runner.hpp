#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dephasing/runner/config.hpp"

namespace dephasing::runner {

/// Column-major numeric table written as CSV.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
  bool operator==(const Table&) const = default;
};

struct InvariantCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

struct RunResult {
  ExperimentConfig config;
  std::map<std::string, Table> tables;  // file stem -> table
  nlohmann::json results;               // kind-specific scalars
  std::vector<InvariantCheck> invariants;

  bool invariants_ok() const;
  nlohmann::json summary() const;
};

/// Executes one experiment. Solver failures (NonConvergence, InvariantViolation, ...) propagate.
RunResult run(const ExperimentConfig& config);

/// Writes <stem>.csv for every table and summary.json into `directory`.
std::vector<std::filesystem::path> write_outputs(const RunResult& result, const std::filesystem::path& directory);

/// One plot-ready CSV per figure panel (see README for the schemas).
/// Throws InvalidArgument when the run lacks the tables the panel needs.
std::vector<std::filesystem::path> emit_plot_data(const RunResult& result, const std::filesystem::path& directory);

std::string to_csv(const Table& table);

/// Evaluates fn(0..count-1) on up to `threads` workers (0 = hardware concurrency) and returns the
/// results in index order, so the output never depends on scheduling.
template <typename Fn>
auto parallel_map(std::size_t count, std::size_t threads, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> results(count);
  std::vector<std::exception_ptr> errors(count);
  if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(count, 1));
  auto work = [&](std::size_t worker) {
    for (std::size_t k = worker; k < count; k += threads) {
      try {
        results[k] = fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace dephasing::runner
