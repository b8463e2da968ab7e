#pragma once
// The ideal CNOT map on polarization angles, calibration of a physical cell so
// that it realizes the map on the basis states, and the truth-table, fidelity
// and temperature studies built on top of it.
//
// Calibration solves two congruences on the unwound target rotation:
//   phi(gamma = 0)    == 0     (mod pi)   control parallel: target kept
//   phi(gamma = pi/2) == pi/2  (mod pi)   control perpendicular: target flipped
// with phi(0) > phi(pi/2) and both windings inside [min_winding, max_winding].

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "polcnot/angle.hpp"
#include "polcnot/cell.hpp"
#include "polcnot/error.hpp"

namespace polcnot {

using GatePair = std::pair<LinearPolarizationAngle, LinearPolarizationAngle>;

/// |gamma> (x) |tau> -> |gamma> (x) |tau - gamma>.
inline GatePair ideal_cnot(LinearPolarizationAngle gamma, LinearPolarizationAngle tau) {
  return {gamma, LinearPolarizationAngle(tau.radians() - gamma.radians())};
}

/// Maps (control in, target in) to (control out, target out).
using GateEngine = std::function<GatePair(LinearPolarizationAngle, LinearPolarizationAngle)>;

inline GateEngine ideal_engine() { return ideal_cnot; }

inline GateEngine physical_engine(CNOTCell cell) {
  cell.validate();
  return [cell](LinearPolarizationAngle gamma, LinearPolarizationAngle tau) {
    const CellOutput out = simulate_cell(cell, gamma, tau);
    return GatePair{out.control, out.target};
  };
}

// ---------------------------------------------------------------------------
// Truth table

/// One line of the gate table: inputs and the expected outputs.
struct TruthTableEntry {
  LinearPolarizationAngle control_in;
  LinearPolarizationAngle target_in;
  LinearPolarizationAngle control_expected;
  LinearPolarizationAngle target_expected;
};

/// The four basis rows, right arrow = 0 and up arrow = pi/2.
inline std::array<TruthTableEntry, 4> cnot_table() {
  const auto r = horizontal();
  const auto u = vertical();
  return {{{r, r, r, r}, {r, u, r, u}, {u, r, u, u}, {u, u, u, r}}};
}

struct TruthTableRow {
  TruthTableEntry entry;
  LinearPolarizationAngle control_out;
  LinearPolarizationAngle target_out;
  double distance = 0.0;  // max of control and target mod-pi distances
  double fidelity = 0.0;  // product of control and target fidelities
  bool pass = false;
};

struct TruthTableReport {
  std::array<TruthTableRow, 4> rows;
  double tolerance = 0.0;

  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const TruthTableRow& r) { return r.pass; });
  }
  int pass_count() const {
    return static_cast<int>(
        std::count_if(rows.begin(), rows.end(), [](const TruthTableRow& r) { return r.pass; }));
  }
  double mean_fidelity() const {
    double s = 0.0;
    for (const auto& r : rows) s += r.fidelity;
    return s / static_cast<double>(rows.size());
  }
};

inline TruthTableReport run_truth_table(const GateEngine& engine, double tolerance = 1e-6) {
  detail::require(std::isfinite(tolerance) && tolerance >= 0.0, "tolerance must be >= 0");
  TruthTableReport report;
  report.tolerance = tolerance;
  const auto table = cnot_table();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const TruthTableEntry& e = table[i];
    const auto [control, target] = engine(e.control_in, e.target_in);
    TruthTableRow& row = report.rows[i];
    row.entry = e;
    row.control_out = control;
    row.target_out = target;
    row.distance = std::max(mod_pi_distance(control, e.control_expected),
                            mod_pi_distance(target, e.target_expected));
    row.fidelity = fidelity(control, e.control_expected) * fidelity(target, e.target_expected);
    row.pass = row.distance <= tolerance;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Calibration

enum class CalibrationParameter { L, E_C, n, T };

inline std::string_view parameter_name(CalibrationParameter p) {
  switch (p) {
    case CalibrationParameter::L: return "L";
    case CalibrationParameter::E_C: return "E_C";
    case CalibrationParameter::n: return "n";
    case CalibrationParameter::T: return "T";
  }
  return "?";
}

inline std::optional<CalibrationParameter> parse_parameter(std::string_view name) {
  for (auto p : {CalibrationParameter::L, CalibrationParameter::E_C, CalibrationParameter::n,
                 CalibrationParameter::T}) {
    if (parameter_name(p) == name) return p;
  }
  return std::nullopt;
}

inline double get_parameter(const CNOTCell& cell, CalibrationParameter p) {
  switch (p) {
    case CalibrationParameter::L: return cell.geometry.L;
    case CalibrationParameter::E_C: return cell.fields.E_C;
    case CalibrationParameter::n: return cell.solution.n;
    case CalibrationParameter::T: return cell.solution.T;
  }
  return 0.0;
}

inline void set_parameter(CNOTCell& cell, CalibrationParameter p, double value) {
  switch (p) {
    case CalibrationParameter::L: cell.geometry.L = value; break;
    case CalibrationParameter::E_C: cell.fields.E_C = value; break;
    case CalibrationParameter::n: cell.solution.n = value; break;
    case CalibrationParameter::T: cell.solution.T = value; break;
  }
}

struct CalibrationProblem {
  CNOTCell cell;  // template; the free parameters are overwritten
  std::array<CalibrationParameter, 2> free{CalibrationParameter::L, CalibrationParameter::E_C};
  std::array<double, 2> lower{1.0, 0.0};
  std::array<double, 2> upper{10.0, 1.0};
  double min_winding = 2.0 * kPi;
  double max_winding = 8.0 * kPi;
  double tolerance = 1e-9;
  int grid = 64;
  std::uint64_t max_evaluations = 100000;

  void validate() const {
    detail::require(free[0] != free[1], "calibration: free parameters must differ");
    for (std::size_t i = 0; i < 2; ++i) {
      detail::require(std::isfinite(lower[i]) && std::isfinite(upper[i]),
                      "calibration: bounds must be finite");
      detail::require(lower[i] >= 0.0 && upper[i] > lower[i],
                      "calibration: bounds must satisfy 0 <= lower < upper");
      if (free[i] != CalibrationParameter::E_C) {
        detail::require(lower[i] > 0.0, "calibration: L, n and T bounds must be positive");
      }
    }
    detail::require(std::isfinite(min_winding) && std::isfinite(max_winding) &&
                        min_winding >= 0.0 && max_winding > min_winding,
                    "calibration: winding bounds must satisfy 0 <= min < max");
    detail::require(std::isfinite(tolerance) && tolerance > 0.0,
                    "calibration: tolerance must be > 0");
    detail::require(grid >= 2, "calibration: grid must be >= 2");
    detail::require(max_evaluations >= 1, "calibration: max_evaluations must be >= 1");
  }

  friend bool operator==(const CalibrationProblem&, const CalibrationProblem&) = default;
};

/// Residual of a cell against the two basis congruences, evaluated with the
/// target prepared in `tau` (the value does not depend on it).
struct CalibrationResidual {
  double residual = 0.0;    // sqrt(d_parallel^2 + d_perp^2)
  double d_parallel = 0.0;  // gamma = 0: distance of target out from tau
  double d_perp = 0.0;      // gamma = pi/2: distance from tau - pi/2
  double w_parallel = 0.0;  // total rotation at gamma = 0
  double w_perp = 0.0;      // total rotation at gamma = pi/2
};

inline CalibrationResidual calibration_residual(const CNOTCell& cell,
                                                LinearPolarizationAngle tau = {}) {
  const PropagationResult par = propagate_target(cell, tau, horizontal());
  const PropagationResult perp = propagate_target(cell, tau, vertical());
  CalibrationResidual r;
  r.d_parallel = mod_pi_distance(par.out_angle, tau);
  r.d_perp = mod_pi_distance(perp.out_angle, LinearPolarizationAngle(tau.radians() - kHalfPi));
  r.residual = std::hypot(r.d_parallel, r.d_perp);
  r.w_parallel = par.total_rotation;
  r.w_perp = perp.total_rotation;
  return r;
}

struct CalibrationResult {
  CNOTCell cell;  // template with the solved parameters filled in
  std::array<CalibrationParameter, 2> free{};
  std::array<double, 2> values{};
  double residual = 0.0;
  double w_parallel = 0.0;
  double w_perp = 0.0;
  std::uint64_t evaluations = 0;

  friend bool operator==(const CalibrationResult&, const CalibrationResult&) = default;
};

namespace detail {

/// Objective over the unit square: squared residual, plus a penalty larger
/// than any feasible value when the winding constraints are violated.
class CalibrationObjective {
 public:
  explicit CalibrationObjective(const CalibrationProblem& problem) : problem_(problem) {}

  struct Value {
    double objective = 0.0;
    double residual = 0.0;
    bool feasible = false;
  };

  std::array<double, 2> to_parameters(const std::array<double, 2>& u) const {
    std::array<double, 2> v{};
    for (std::size_t i = 0; i < 2; ++i) {
      const double t = std::clamp(u[i], 0.0, 1.0);
      v[i] = problem_.lower[i] + t * (problem_.upper[i] - problem_.lower[i]);
    }
    return v;
  }

  CNOTCell cell_at(const std::array<double, 2>& u) const {
    CNOTCell cell = problem_.cell;
    const auto v = to_parameters(u);
    for (std::size_t i = 0; i < 2; ++i) set_parameter(cell, problem_.free[i], v[i]);
    return cell;
  }

  Value operator()(const std::array<double, 2>& u) {
    ++evaluations_;
    if (evaluations_ > problem_.max_evaluations) {
      throw EvaluationCapExceeded("calibration: evaluation cap of " +
                                  std::to_string(problem_.max_evaluations) + " reached");
    }
    const CalibrationResidual r = calibration_residual(cell_at(u));
    double violation = 0.0;
    violation += std::max(0.0, problem_.min_winding - r.w_perp);
    violation += std::max(0.0, r.w_parallel - problem_.max_winding);
    violation += std::max(0.0, r.w_perp - r.w_parallel);
    const bool ordered = r.w_parallel > r.w_perp;
    Value v;
    v.residual = r.residual;
    v.feasible = violation == 0.0 && ordered;
    v.objective = r.residual * r.residual;
    if (!v.feasible) v.objective += kPi * kPi + violation;
    return v;
  }

  std::uint64_t evaluations() const { return evaluations_; }

 private:
  const CalibrationProblem& problem_;
  std::uint64_t evaluations_ = 0;
};

}  // namespace detail

/// Grid scan over the parameter box followed by Nelder-Mead refinement of the
/// squared residual in box-normalized coordinates. Fully deterministic: grid
/// ties go to the lowest (i, j) index.
inline CalibrationResult calibrate(const CalibrationProblem& problem) {
  problem.validate();
  problem.cell.validate();
  detail::CalibrationObjective objective(problem);
  using Point = std::array<double, 2>;

  const int n = problem.grid;
  const double h = 1.0 / static_cast<double>(n - 1);
  Point best{};
  double best_f = std::numeric_limits<double>::infinity();
  double best_residual = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Point u{i * h, j * h};
      const auto v = objective(u);
      if (v.feasible && v.objective < best_f) {
        best_f = v.objective;
        best_residual = v.residual;
        best = u;
      }
    }
  }
  if (!(best_residual < kPi / 4.0)) {
    throw NoSolutionInBounds("calibration: no grid cell with residual below pi/4 inside bounds");
  }

  auto finish = [&](const Point& u) {
    CalibrationResult result;
    result.cell = objective.cell_at(u);
    result.free = problem.free;
    result.values = objective.to_parameters(u);
    const CalibrationResidual r = calibration_residual(result.cell);
    result.residual = r.residual;
    result.w_parallel = r.w_parallel;
    result.w_perp = r.w_perp;
    result.evaluations = objective.evaluations();
    return result;
  };
  if (best_residual <= problem.tolerance) return finish(best);

  struct Vertex {
    Point u;
    double f;
    double residual;
  };
  auto eval = [&](const Point& u) {
    const Point c{std::clamp(u[0], 0.0, 1.0), std::clamp(u[1], 0.0, 1.0)};
    const auto v = objective(c);
    return Vertex{c, v.objective, v.feasible ? v.residual : std::numeric_limits<double>::infinity()};
  };
  // Initial steps point into the box.
  auto step_from = [](double x, double s) { return x + s <= 1.0 ? x + s : x - s; };

  Point start = best;
  double step = h;
  for (;;) {
    std::array<Vertex, 3> simplex{eval(start), eval({step_from(start[0], step), start[1]}),
                                  eval({start[0], step_from(start[1], step)})};
    for (;;) {
      std::sort(simplex.begin(), simplex.end(),
                [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      if (simplex[0].residual <= problem.tolerance) return finish(simplex[0].u);
      double diameter = 0.0;
      for (std::size_t k = 1; k < 3; ++k) {
        diameter = std::max(diameter, std::hypot(simplex[k].u[0] - simplex[0].u[0],
                                                 simplex[k].u[1] - simplex[0].u[1]));
      }
      if (diameter < 1e-15) break;

      const Point centroid{(simplex[0].u[0] + simplex[1].u[0]) / 2.0,
                           (simplex[0].u[1] + simplex[1].u[1]) / 2.0};
      auto along = [&](double t) {
        return Point{centroid[0] + t * (simplex[2].u[0] - centroid[0]),
                     centroid[1] + t * (simplex[2].u[1] - centroid[1])};
      };
      const Vertex reflected = eval(along(-1.0));
      if (reflected.f < simplex[0].f) {
        const Vertex expanded = eval(along(-2.0));
        simplex[2] = expanded.f < reflected.f ? expanded : reflected;
      } else if (reflected.f < simplex[1].f) {
        simplex[2] = reflected;
      } else {
        const bool outside = reflected.f < simplex[2].f;
        const Vertex contracted = eval(along(outside ? -0.5 : 0.5));
        if (contracted.f < (outside ? reflected.f : simplex[2].f)) {
          simplex[2] = contracted;
        } else {
          for (std::size_t k = 1; k < 3; ++k) {
            simplex[k] = eval({(simplex[0].u[0] + simplex[k].u[0]) / 2.0,
                               (simplex[0].u[1] + simplex[k].u[1]) / 2.0});
          }
        }
      }
    }
    // Collapsed without reaching tolerance: restart around the best vertex
    // with a smaller simplex. The evaluation cap bounds the number of restarts.
    start = simplex[0].u;
    step = std::max(step * 1e-3, 1e-12);
  }
}

// ---------------------------------------------------------------------------
// Fidelity and temperature studies

struct NoiseConfig {
  std::uint64_t shots = 16;
  std::uint64_t molecules_per_shot = 1000000;
  std::uint64_t seed = 0;
};

struct FidelityPoint {
  LinearPolarizationAngle gamma;
  LinearPolarizationAngle tau;
  LinearPolarizationAngle expected_target;
  LinearPolarizationAngle actual_target;
  double fidelity = 0.0;
  std::optional<double> noisy_fidelity;  // mean over shots
};

struct FidelityReport {
  std::vector<FidelityPoint> points;

  double mean_fidelity() const {
    double s = 0.0;
    for (const auto& p : points) s += p.fidelity;
    return points.empty() ? 0.0 : s / static_cast<double>(points.size());
  }
  std::optional<double> mean_noisy_fidelity() const {
    if (points.empty() || !points.front().noisy_fidelity) return std::nullopt;
    double s = 0.0;
    for (const auto& p : points) s += p.noisy_fidelity.value_or(0.0);
    return s / static_cast<double>(points.size());
  }
};

/// Target-output fidelity against the ideal map on every (gamma, tau) of the
/// grid. Off-basis values are reported, not judged.
inline FidelityReport gate_fidelity_report(const CNOTCell& cell, std::span<const double> gammas,
                                           std::span<const double> taus,
                                           const std::optional<NoiseConfig>& noise = std::nullopt,
                                           unsigned threads = 0) {
  cell.validate();
  FidelityReport report;
  std::uint64_t point_index = 0;
  for (double g : gammas) {
    for (double t : taus) {
      FidelityPoint p;
      p.gamma = LinearPolarizationAngle(g);
      p.tau = LinearPolarizationAngle(t);
      p.expected_target = ideal_cnot(p.gamma, p.tau).second;
      p.actual_target = simulate_cell(cell, p.gamma, p.tau).target;
      p.fidelity = fidelity(p.actual_target, p.expected_target);
      if (noise) {
        const auto shots =
            mc_shot_distribution(cell, p.gamma, p.tau, noise->shots, noise->molecules_per_shot,
                                 shot_seed(noise->seed, point_index), threads);
        double s = 0.0;
        for (const auto& r : shots) s += fidelity(r.out_angle, p.expected_target);
        p.noisy_fidelity = s / static_cast<double>(shots.size());
      }
      report.points.push_back(p);
      ++point_index;
    }
  }
  return report;
}

struct TemperatureRow {
  double T = 0.0;
  bool recalibrated = false;
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::optional<CalibrationResult> calibration;
  std::string error;  // why recalibration failed, if it did
  /// Mean basis fidelity of the cell calibrated at T_values[0], run at T.
  std::optional<double> fixed_fidelity;
};

/// Recalibrate at every temperature and, separately, measure how the cell
/// calibrated at the first temperature drifts.
inline std::vector<TemperatureRow> temperature_sweep(const CalibrationProblem& problem,
                                                     std::span<const double> T_values) {
  detail::require(!T_values.empty(), "sweep: need at least one temperature");
  for (std::size_t i = 0; i < T_values.size(); ++i) {
    detail::require(std::isfinite(T_values[i]) && T_values[i] > 0.0,
                    "sweep: temperatures must be > 0");
    detail::require(i == 0 || T_values[i] >= T_values[i - 1], "sweep: temperatures must be sorted");
  }
  detail::require(problem.free[0] != CalibrationParameter::T &&
                      problem.free[1] != CalibrationParameter::T,
                  "sweep: T cannot be a free calibration parameter");

  auto at_temperature = [&](double T) {
    CalibrationProblem p = problem;
    p.cell.solution.T = T;
    return p;
  };

  std::vector<TemperatureRow> rows;
  std::optional<CNOTCell> reference;
  for (std::size_t i = 0; i < T_values.size(); ++i) {
    TemperatureRow row;
    row.T = T_values[i];
    try {
      row.calibration = calibrate(at_temperature(row.T));
      row.residual = row.calibration->residual;
      row.recalibrated = true;
    } catch (const Error& e) {
      row.error = e.what();
    }
    if (i == 0 && row.calibration) reference = row.calibration->cell;
    if (reference) {
      CNOTCell drifted = *reference;
      drifted.solution.T = row.T;
      row.fixed_fidelity = run_truth_table(physical_engine(drifted)).mean_fidelity();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace polcnot
