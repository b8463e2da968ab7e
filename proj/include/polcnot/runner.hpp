#pragma once
// Executes a parsed scenario: dispatches to the matching study, writes the
// CSV files named by the output section and builds a plain-text summary.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "polcnot/calibration.hpp"
#include "polcnot/format.hpp"
#include "polcnot/scenario.hpp"

namespace polcnot {

/// Process exit codes of the command-line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalid = 1,
  kExitCalibration = 2,
  kExitTruthTable = 3,
  kExitIo = 4,
};

struct RunReport {
  int exit_code = kExitOk;
  std::string summary;
  std::vector<std::filesystem::path> files;
  int passed = 0;
  int failed = 0;
};

using CsvRow = std::vector<std::string>;

class CsvTable {
 public:
  explicit CsvTable(std::initializer_list<std::string> header) : header_(header) {}

  void add(CsvRow row) { rows_.push_back(std::move(row)); }

  std::string str() const {
    std::string out;
    auto line = [&](const CsvRow& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += r[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  CsvRow header_;
  std::vector<CsvRow> rows_;
};

inline std::string format_bool(bool b) { return b ? "true" : "false"; }

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

/// Truth-table CSV in the fixed column order.
inline CsvTable truth_table_csv(const TruthTableReport& report) {
  CsvTable table({"control_in_rad", "target_in_rad", "control_out_rad", "target_out_rad",
                  "expected_target_rad", "distance_rad", "fidelity", "pass"});
  for (const auto& row : report.rows) {
    table.add({format_double(row.entry.control_in.radians()),
               format_double(row.entry.target_in.radians()),
               format_double(row.control_out.radians()), format_double(row.target_out.radians()),
               format_double(row.entry.target_expected.radians()), format_double(row.distance),
               format_double(row.fidelity), format_bool(row.pass)});
  }
  return table;
}

namespace detail {

class RunContext {
 public:
  explicit RunContext(const Scenario& s) : scenario_(s) {}

  std::filesystem::path path_for(const std::string& default_name, bool primary) const {
    const std::filesystem::path dir(scenario_.output.dir.empty() ? "." : scenario_.output.dir);
    if (primary && !scenario_.output.csv.empty()) return dir / scenario_.output.csv;
    return dir / default_name;
  }

  void write(const std::filesystem::path& path, const std::string& text) {
    write_text_file(path, text);
    report.files.push_back(path);
  }

  std::ostringstream summary;
  RunReport report;

 private:
  const Scenario& scenario_;
};

inline void summarize_truth_table(std::ostringstream& out, const TruthTableReport& t) {
  out << "truth table (tolerance " << format_double(t.tolerance) << " rad)\n";
  for (const auto& row : t.rows) {
    out << "  in (" << format_double(row.entry.control_in.radians()) << ", "
        << format_double(row.entry.target_in.radians()) << ") -> out ("
        << format_double(row.control_out.radians()) << ", "
        << format_double(row.target_out.radians()) << ")  distance "
        << format_double(row.distance) << "  " << (row.pass ? "PASS" : "FAIL") << '\n';
  }
  out << "rows passed: " << t.pass_count() << "/4\n";
}

inline void run_simulate(const Scenario& s, RunContext& ctx) {
  const CellOutput out = simulate_cell(s.cell, s.cell.fields.gamma, s.tau);
  CsvTable table({"control_in_rad", "target_in_rad", "control_out_rad", "target_out_rad",
                  "total_rotation_rad", "rotatory_power_rad_per_m"});
  table.add({format_double(s.cell.fields.gamma.radians()), format_double(s.tau.radians()),
             format_double(out.control.radians()), format_double(out.target.radians()),
             format_double(out.target_detail.total_rotation),
             format_double(out.target_detail.rotatory_power)});
  ctx.write(ctx.path_for("simulate.csv", true), table.str());
  ctx.summary << "simulate: control " << format_double(out.control.radians()) << " rad, target "
              << format_double(out.target.radians()) << " rad (total rotation "
              << format_double(out.target_detail.total_rotation) << " rad)\n";

  if (s.mc.shots > 0) {
    const auto shots = mc_shot_distribution(s.cell, s.cell.fields.gamma, s.tau, s.mc.shots,
                                            s.mc.molecules_per_shot, s.mc.seed);
    CsvTable shot_table({"shot", "target_out_rad", "total_rotation_rad"});
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t i = 0; i < shots.size(); ++i) {
      shot_table.add({std::to_string(i), format_double(shots[i].out_angle.radians()),
                      format_double(shots[i].total_rotation)});
      sum += shots[i].total_rotation;
      sum2 += shots[i].total_rotation * shots[i].total_rotation;
    }
    const double count = static_cast<double>(shots.size());
    const double mean = sum / count;
    const double sd = count > 1 ? std::sqrt(std::max(0.0, (sum2 - count * mean * mean) / (count - 1))) : 0.0;
    ctx.write(ctx.path_for("simulate_shots.csv", false), shot_table.str());
    ctx.summary << "thermal shots: " << shots.size() << " x " << s.mc.molecules_per_shot
                << " molecules, total rotation mean " << format_double(mean) << " rad, sd "
                << format_double(sd) << " rad\n";
  }
  ctx.report.passed = 1;
}

inline void run_truth_table_kind(const Scenario& s, RunContext& ctx) {
  const GateEngine engine =
      s.run.engine == EngineKind::ideal ? ideal_engine() : physical_engine(s.cell);
  const TruthTableReport t = run_truth_table(engine, s.run.tolerance);
  ctx.write(ctx.path_for("truth-table.csv", true), truth_table_csv(t).str());
  summarize_truth_table(ctx.summary, t);
  ctx.report.passed = t.pass_count();
  ctx.report.failed = 4 - t.pass_count();
  if (!t.all_pass()) ctx.report.exit_code = kExitTruthTable;
}

inline void run_calibrate(const Scenario& s, RunContext& ctx) {
  const CalibrationResult r = calibrate(calibration_problem(s));
  CsvTable table({"free_1", "value_1", "free_2", "value_2", "residual_rad", "w_parallel_rad",
                  "w_perp_rad", "evaluations"});
  table.add({std::string(parameter_name(r.free[0])), format_double(r.values[0]),
             std::string(parameter_name(r.free[1])), format_double(r.values[1]),
             format_double(r.residual), format_double(r.w_parallel), format_double(r.w_perp),
             format_count(r.evaluations)});
  ctx.write(ctx.path_for("calibrate.csv", true), table.str());

  const TruthTableReport t = run_truth_table(physical_engine(r.cell), s.run.tolerance);
  ctx.write(ctx.path_for("truth-table.csv", false), truth_table_csv(t).str());

  // The calibrated cell as a ready-to-run truth-table scenario.
  Scenario calibrated = s;
  calibrated.cell = r.cell;
  calibrated.run.kind = RunKind::truth_table;
  calibrated.output.csv.clear();
  calibrated.output.summary.clear();
  ctx.write(ctx.path_for("calibrated.scenario", false), serialize_scenario(calibrated));

  ctx.summary << "calibrated " << parameter_name(r.free[0]) << " = " << format_double(r.values[0])
              << ", " << parameter_name(r.free[1]) << " = " << format_double(r.values[1]) << '\n'
              << "residual " << format_double(r.residual) << " rad after " << r.evaluations
              << " evaluations\n"
              << "winding pair: parallel " << format_double(r.w_parallel / kPi) << " pi, perpendicular "
              << format_double(r.w_perp / kPi) << " pi\n";
  summarize_truth_table(ctx.summary, t);
  ctx.report.passed = t.pass_count();
  ctx.report.failed = 4 - t.pass_count();
  if (!t.all_pass()) ctx.report.exit_code = kExitTruthTable;
}

inline void run_sweep(const Scenario& s, RunContext& ctx) {
  const auto rows = temperature_sweep(calibration_problem(s), s.sweep.values);
  CsvTable table({"T", "recalibrated", "residual_rad", "w_parallel_rad", "w_perp_rad",
                  "fixed_mean_fidelity"});
  ctx.summary << "temperature sweep over " << rows.size() << " values\n";
  for (const auto& row : rows) {
    const auto w = [&](auto member) {
      return row.calibration ? format_double((*row.calibration).*member) : std::string("nan");
    };
    table.add({format_double(row.T), format_bool(row.recalibrated), format_double(row.residual),
               w(&CalibrationResult::w_parallel), w(&CalibrationResult::w_perp),
               row.fixed_fidelity ? format_double(*row.fixed_fidelity) : std::string("nan")});
    ctx.summary << "  T = " << format_double(row.T) << ": "
                << (row.recalibrated ? "recalibrated, residual " + format_double(row.residual)
                                     : "recalibration failed (" + row.error + ")");
    if (row.fixed_fidelity) {
      ctx.summary << "; fixed-calibration fidelity " << format_double(*row.fixed_fidelity);
    }
    ctx.summary << '\n';
    (row.recalibrated ? ctx.report.passed : ctx.report.failed) += 1;
  }
  ctx.write(ctx.path_for("sweep.csv", true), table.str());
  if (ctx.report.failed > 0) ctx.report.exit_code = kExitCalibration;
}

inline void run_oracle(const Scenario& s, RunContext& ctx) {
  const OracleReport r = oracle_compare(s.cell.solution, s.cell.fields.E_C, s.mc.samples, s.mc.seed);
  const std::string ratio = r.ratio ? format_double(*r.ratio) : std::string("undefined");
  CsvTable table({"bias", "samples", "seed", "formula_polarization", "mc_polarization",
                  "mc_standard_error", "boltzmann_polarization", "ratio"});
  table.add({format_double(r.bias), format_count(r.samples), format_count(s.mc.seed),
             format_double(r.formula_polarization), format_double(r.mc_polarization),
             format_double(r.mc_standard_error), format_double(r.boltzmann_polarization), ratio});
  ctx.write(ctx.path_for("oracle.csv", true), table.str());
  ctx.summary << "oracle at x = " << format_double(r.bias) << " with " << r.samples << " samples\n"
              << "  Langevin-Debye |P|: " << format_double(r.formula_polarization) << '\n'
              << "  Monte Carlo |P|:    " << format_double(r.mc_polarization) << " +/- "
              << format_double(r.mc_standard_error) << '\n'
              << "  Boltzmann |P|:      " << format_double(r.boltzmann_polarization) << '\n'
              << "  ratio formula/MC:   " << ratio << '\n';
  ctx.report.passed = 1;
}

}  // namespace detail

/// Run a scenario. Module errors become exit codes; nothing is thrown.
inline RunReport run_scenario(const Scenario& s) {
  detail::RunContext ctx(s);
  try {
    switch (s.run.kind) {
      case RunKind::simulate: detail::run_simulate(s, ctx); break;
      case RunKind::truth_table: detail::run_truth_table_kind(s, ctx); break;
      case RunKind::calibrate: detail::run_calibrate(s, ctx); break;
      case RunKind::sweep: detail::run_sweep(s, ctx); break;
      case RunKind::oracle: detail::run_oracle(s, ctx); break;
    }
  } catch (const IoError& e) {
    ctx.summary << "error: " << e.what() << '\n';
    ctx.report.exit_code = kExitIo;
  } catch (const NoSolutionInBounds& e) {
    ctx.summary << "calibration failed: " << e.what() << '\n';
    ctx.report.exit_code = kExitCalibration;
  } catch (const EvaluationCapExceeded& e) {
    ctx.summary << "calibration failed: " << e.what() << '\n';
    ctx.report.exit_code = kExitCalibration;
  } catch (const Error& e) {
    ctx.summary << "invalid scenario: " << e.what() << '\n';
    ctx.report.exit_code = kExitInvalid;
  }
  ctx.report.summary = ctx.summary.str();
  if (!s.output.summary.empty() && ctx.report.exit_code != kExitIo) {
    try {
      ctx.write(ctx.path_for(s.output.summary, false), ctx.report.summary);
    } catch (const IoError& e) {
      ctx.report.summary += std::string("error: ") + e.what() + '\n';
      ctx.report.exit_code = kExitIo;
    }
  }
  return ctx.report;
}

}  // namespace polcnot
