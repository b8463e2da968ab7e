// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "polcnot/polcnot.hpp"

namespace {

using namespace polcnot;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Scenario load(const std::string& name) {
  const auto r = parse_scenario(read_file(fs::path(POLCNOT_SCENARIO_DIR) / (name + ".scenario")));
  if (!r.ok()) throw Error("bundled scenario " + name + " does not parse");
  return *r.scenario;
}

CalibrationProblem natural_problem() { return calibration_problem(load("natural_calibrate")); }

Solution natural_solution() {
  Solution s;
  s.units = UnitSystem::natural;
  return s;
}

CNOTCell random_cell(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 5.0);
  CNOTCell cell;
  cell.solution.units = UnitSystem::natural;
  cell.solution.molecule = {u(rng), u(rng), u(rng), u(rng)};
  cell.solution.n = u(rng);
  cell.solution.T = u(rng);
  cell.fields.B = u(rng);
  cell.fields.E_C = u(rng);
  cell.geometry.L = u(rng);
  return cell;
}

Outcome truth_table_reproduction() {
  Outcome o;
  const auto ideal = run_truth_table(ideal_engine(), 0.0);
  for (const auto& row : ideal.rows) o.check(row.distance == 0.0, "ideal row distance " + fmt(row.distance));
  o.check(ideal.all_pass(), "ideal engine failed a row");

  const auto fixture = run_truth_table(physical_engine(load("natural_truth_table").cell), 1e-6);
  o.check(fixture.all_pass(), "calibrated fixture cell failed a row");
  const auto calibrated = run_truth_table(physical_engine(calibrate(natural_problem()).cell), 1e-6);
  double worst = 0.0;
  for (const auto& row : calibrated.rows) worst = std::max(worst, row.distance);
  o.check(calibrated.all_pass(), "freshly calibrated cell failed a row");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("worst physical distance ") + fmt(worst) + " rad";
  return o;
}

Outcome calibration_convergence() {
  Outcome o;
  const auto r = calibrate(natural_problem());
  o.check(r.residual <= 1e-9, "residual " + fmt(r.residual));
  o.check(r.evaluations <= 100000, "evaluations " + std::to_string(r.evaluations));
  o.check(r.w_parallel > r.w_perp, "winding order");
  o.check(std::abs(r.w_parallel - 3.0 * kPi) < 1e-6 && std::abs(r.w_perp - 2.5 * kPi) < 1e-6,
          "winding pair not (3pi, 5pi/2)");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("residual ") + fmt(r.residual) +
              ", windings (" + fmt(r.w_parallel / kPi) + " pi, " + fmt(r.w_perp / kPi) + " pi), " +
              std::to_string(r.evaluations) + " evaluations";
  return o;
}

Outcome formula_value() {
  Outcome o;
  const double P = langevin_debye_polarization(natural_solution(), 1.0);
  o.check(std::abs(P - 2.221441469079183) <= 1e-12, "P = " + fmt(P));
  o.check(std::abs(P - oracle::langevin_debye(1, 1, 1, 1)) <= 1e-12, "direct evaluation mismatch");
  o.detail = "P = " + fmt(P);
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  const Solution sol = natural_solution();
  for (double x : {0.1, 1.0, 5.0}) {
    FieldConfig f;
    f.E_C = x;  // p = kT = 1
    f.ideal_b = true;
    const auto mc = mc_mean_polarization(sol, f, 1000000, 0);
    const double expected = oracle::bessel_ratio(x);
    const double z = (mc.magnitude - expected) / mc.standard_error;
    o.check(std::abs(z) < 3.0, "x=" + fmt(x) + " z=" + fmt(z));
    o.detail += "x=" + fmt(x) + " z=" + fmt(z) + "; ";
  }
  const auto report = oracle_compare(sol, 0.05, 10000000, 0);
  const double target = kPi * std::sqrt(2.0);
  o.check(report.ratio.has_value(), "ratio undefined");
  const double ratio = report.ratio.value_or(0.0);
  o.check(std::abs(ratio - target) <= 0.02 * target, "ratio " + fmt(ratio));
  o.detail += "ratio " + fmt(ratio) + " vs " + fmt(target);
  return o;
}

Outcome invariant_suites() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> angle(-20.0, 20.0);

  int control = 0, group = 0, overlap = 0, monotone = 0, linear = 0;
  for (int i = 0; i < 1000; ++i) {
    const CNOTCell cell = random_cell(rng);
    const LinearPolarizationAngle g(angle(rng));
    if (!(propagate_control(cell, g).out_angle == g)) ++control;

    const LinearPolarizationAngle s(angle(rng));
    const double a = angle(rng), b = angle(rng);
    if (mod_pi_distance(rotate_angle(rotate_angle(s, a), b), rotate_angle(s, a + b)) > 1e-12) ++group;

    const LinearPolarizationAngle t(angle(rng));
    if (std::abs(fidelity(s, t) - std::norm(inner_product(angle_to_jones(s), angle_to_jones(t)))) > 1e-12) {
      ++overlap;
    }

    if (i < 200) {
      double prev_g = 2.0, prev_rho = INFINITY;
      for (int k = 0; k <= 32; ++k) {  // gamma from 0 to pi/2: g decreasing
        const LinearPolarizationAngle gk(kHalfPi * k / 32.0);
        const double gv = alignment_factor(gk), rho = rotatory_power(cell, gk);
        if (gv <= prev_g && rho > prev_rho) ++monotone;
        prev_g = gv;
        prev_rho = rho;
      }
    }

    CNOTCell doubled = cell;
    doubled.geometry.L *= 2.0;
    const double w1 = propagate_target(cell, t, g).total_rotation;
    const double w2 = propagate_target(doubled, t, g).total_rotation;
    if (std::abs(w2 - 2.0 * w1) > 1e-13 * w1) ++linear;
  }
  o.check(control == 0, std::to_string(control) + " control changes");
  o.check(group == 0, std::to_string(group) + " group-action violations");
  o.check(overlap == 0, std::to_string(overlap) + " fidelity/Jones mismatches");
  o.check(monotone == 0, std::to_string(monotone) + " rho monotonicity violations");
  o.check(linear == 0, std::to_string(linear) + " L-linearity violations");

  int round_trip = 0;
  const Scenario base = load("si_bench");
  for (int i = 0; i < 200; ++i) {
    Scenario s = base;
    s.cell.geometry.L = std::ldexp(static_cast<double>(rng() >> 11), -53) + 1e-3;
    s.cell.fields.gamma = LinearPolarizationAngle(angle(rng));
    s.mc.seed = rng() >> 11;
    const auto back = parse_scenario(serialize_scenario(s));
    if (!back.ok() || !(*back.scenario == s) || serialize_scenario(*back.scenario) != serialize_scenario(s)) {
      ++round_trip;
    }
  }
  o.check(round_trip == 0, std::to_string(round_trip) + " round-trip failures");

  Scenario sim = load("natural_truth_table");
  sim.run.kind = RunKind::simulate;
  sim.mc.shots = 4;
  sim.mc.molecules_per_shot = 100000;
  sim.mc.seed = 5;
  sim.output.dir = "acceptance_out/a";
  run_scenario(sim);
  sim.output.dir = "acceptance_out/b";
  run_scenario(sim);
  const std::string a = read_file("acceptance_out/a/simulate_shots.csv");
  o.check(!a.empty() && a == read_file("acceptance_out/b/simulate_shots.csv"),
          "shot CSV differs between identical runs");

  if (o.detail.empty()) o.detail = "all invariants hold";
  return o;
}

Outcome temperature_degradation() {
  Outcome o;
  const CalibrationProblem problem = natural_problem();
  const auto cal = calibrate(problem);

  CNOTCell hot = cal.cell;
  hot.solution.T *= 2.0;
  const double measured = run_truth_table(physical_engine(hot)).mean_fidelity();

  // Direct evaluation: P halves, so the alignment part of the parallel
  // winding halves; the perpendicular winding is unchanged.
  const double w_perp = cal.w_perp;
  const double w_par = w_perp + (cal.w_parallel - cal.w_perp) / 2.0;
  double expected = 0.0;
  const double rows[4][3] = {{0, 0, 0}, {0, kHalfPi, kHalfPi}, {kHalfPi, 0, kHalfPi}, {kHalfPi, kHalfPi, 0}};
  for (const auto& r : rows) {
    const double w = r[0] == 0.0 ? w_par : w_perp;
    const double c = std::cos((r[1] - w) - r[2]);
    expected += c * c / 4.0;
  }
  o.check(measured < 1.0, "fidelity did not drop");
  o.check(std::abs(measured - expected) <= 1e-9,
          "measured " + fmt(measured) + " vs direct " + fmt(expected));

  CalibrationProblem recal = problem;
  recal.cell.solution.T *= 2.0;
  const auto again = calibrate(recal);
  o.check(run_truth_table(physical_engine(again.cell), 1e-6).all_pass(), "recalibration did not restore the table");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("mean basis fidelity at 2T ") + fmt(measured) +
              " (direct " + fmt(expected) + "), recalibrated E_C " + fmt(again.values[1]);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double time_limit_s;  // 0: no limit stated
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"1 truth-table reproduction", 1.0, truth_table_reproduction},
      {"2 calibration convergence", 5.0, calibration_convergence},
      {"3 Langevin-Debye value", 0.0, formula_value},
      {"4 Monte Carlo oracle equivalence", 60.0, oracle_equivalence},
      {"5 invariant suites", 0.0, invariant_suites},
      {"6 temperature degradation", 0.0, temperature_degradation},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0.0 && seconds >= c.time_limit_s) {
      o.pass = false;
      o.detail += "; runtime " + fmt(seconds) + " s exceeds " + fmt(c.time_limit_s) + " s";
    }
    std::printf("[%s] criterion %s (%.3f s): %s\n", o.pass ? "PASS" : "FAIL", c.name, seconds,
                o.detail.c_str());
    if (!o.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures,
              std::size(criteria));
  return failures == 0 ? 0 : 1;
}
