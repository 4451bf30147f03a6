#include <cstdio>
#include <fstream>

#include "dephasing/errors.hpp"
#include "dephasing/runner/runner.hpp"

namespace dephasing::runner {

namespace fs = std::filesystem;

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

fs::path write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
  return path;
}

const Table& require(const RunResult& r, const std::string& stem) {
  const auto it = r.tables.find(stem);
  if (it == r.tables.end()) {
    throw InvalidArgument("run output '" + stem + "' is missing; cannot emit plot data for " +
                          std::string(to_string(r.config.kind)));
  }
  return it->second;
}

Table select(const Table& t, const std::vector<std::string>& columns) {
  Table out;
  out.columns = columns;
  std::vector<std::size_t> idx;
  for (const auto& c : columns) idx.push_back(t.column(c));
  for (const auto& row : t.rows) {
    std::vector<double> r;
    for (auto k : idx) r.push_back(row[k]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string s;
  for (std::size_t k = 0; k < table.columns.size(); ++k) s += (k ? "," : "") + table.columns[k];
  s += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) s += ',';
      s += format_number(row[k]);
    }
    s += '\n';
  }
  return s;
}

std::vector<fs::path> write_outputs(const RunResult& result, const fs::path& directory) {
  fs::create_directories(directory);
  std::vector<fs::path> written;
  for (const auto& [stem, table] : result.tables) written.push_back(write_text(directory / (stem + ".csv"), to_csv(table)));
  written.push_back(write_text(directory / "summary.json", result.summary().dump(2) + "\n"));
  return written;
}

std::vector<fs::path> emit_plot_data(const RunResult& result, const fs::path& directory) {
  std::vector<std::pair<std::string, Table>> panels;
  switch (result.config.kind) {
    case ExperimentKind::kEvolve: {
      const Table& t = require(result, "evolve");
      std::vector<std::string> cols{"t"};
      for (const auto& c : t.columns) {
        if (c.size() > 4 && c.compare(c.size() - 4, 4, "_abs") == 0) cols.push_back(c);
      }
      panels.emplace_back("plot_correlation_dynamics", select(t, cols));
      break;
    }
    case ExperimentKind::kCorrelationMap:
      panels.emplace_back("plot_correlation_map", select(require(result, "correlation_map"), {"i", "j", "abs", "re", "im"}));
      break;
    case ExperimentKind::kConcurrenceScan: {
      const Table& t = require(result, "concurrence_scan");
      Table end_to_end;
      end_to_end.columns = {"n_sites", "particles", "concurrence", "closed_form"};
      for (const auto& row : t.rows) {
        if (row[t.column("i")] == 1.0) {
          end_to_end.add_row({row[t.column("n_sites")], row[t.column("particles")], row[t.column("concurrence")],
                              row[t.column("closed_form")]});
        }
      }
      panels.emplace_back("plot_concurrence_vs_size", std::move(end_to_end));
      break;
    }
    case ExperimentKind::kFockQuench:
      panels.emplace_back("plot_quench",
                          select(require(result, "fock_quench"),
                                 {"t", "corr_abs", "corr_abs_unquenched", "segment", "quench_marker"}));
      break;
    case ExperimentKind::kRobustnessAA:
      panels.emplace_back("plot_concurrence_vs_aa",
                          select(require(result, "robustness_aa"), {"aa_amplitude", "t", "concurrence"}));
      break;
    case ExperimentKind::kRobustnessInt:
      panels.emplace_back("plot_concurrence_vs_interaction",
                          select(require(result, "robustness_int"), {"interaction", "t", "concurrence"}));
      break;
    case ExperimentKind::kSteady:
      panels.emplace_back("plot_steady_populations", [&] {
        const Table& t = require(result, "steady_correlation");
        Table p;
        p.columns = {"site", "population"};
        for (const auto& row : t.rows) {
          if (row[0] == row[1]) p.add_row({row[0], row[2]});
        }
        return p;
      }());
      break;
  }
  fs::create_directories(directory);
  std::vector<fs::path> written;
  for (const auto& [stem, table] : panels) written.push_back(write_text(directory / (stem + ".csv"), to_csv(table)));
  return written;
}

}  // namespace dephasing::runner
