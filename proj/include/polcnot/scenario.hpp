#pragma once
// Scenario files: a line-oriented description of one bench run.
//
//   # comment
//   [molecule]
//   p = 1.0e-29          # numbers accept scientific notation
//   [beams]
//   gamma = 90 deg       # angles take an optional deg/rad suffix (rad default)
//
// Sections come from a fixed set; every key belongs to exactly one section.
// Parsing collects every diagnostic instead of stopping at the first.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "polcnot/angle.hpp"
#include "polcnot/calibration.hpp"
#include "polcnot/cell.hpp"
#include "polcnot/format.hpp"
#include "polcnot/medium.hpp"

namespace polcnot {

enum class RunKind { simulate, truth_table, calibrate, sweep, oracle };

inline std::string_view run_kind_name(RunKind k) {
  switch (k) {
    case RunKind::simulate: return "simulate";
    case RunKind::truth_table: return "truth-table";
    case RunKind::calibrate: return "calibrate";
    case RunKind::sweep: return "sweep";
    case RunKind::oracle: return "oracle";
  }
  return "?";
}

inline std::optional<RunKind> parse_run_kind(std::string_view s) {
  for (auto k : {RunKind::simulate, RunKind::truth_table, RunKind::calibrate, RunKind::sweep,
                 RunKind::oracle}) {
    if (run_kind_name(k) == s) return k;
  }
  return std::nullopt;
}

enum class EngineKind { ideal, physical };

struct RunSpec {
  RunKind kind = RunKind::simulate;
  EngineKind engine = EngineKind::physical;
  double tolerance = 1e-6;  // truth-table acceptance, rad
  std::array<CalibrationParameter, 2> free{CalibrationParameter::L, CalibrationParameter::E_C};
  std::array<double, 2> lower{1.0, 0.0};
  std::array<double, 2> upper{10.0, 1.0};
  int grid = 64;
  double min_winding = 2.0 * kPi;
  double max_winding = 8.0 * kPi;
  double residual_tolerance = 1e-9;
  std::uint64_t max_evaluations = 100000;

  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct SweepSpec {
  std::string parameter = "T";
  std::vector<double> values;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct McSpec {
  std::uint64_t samples = 1000000;
  std::uint64_t shots = 0;
  std::uint64_t molecules_per_shot = 1000000;
  std::uint64_t seed = 0;

  friend bool operator==(const McSpec&, const McSpec&) = default;
};

struct OutputSpec {
  std::string dir = ".";
  std::string csv;      // empty: <run kind>.csv
  std::string summary;  // empty: no summary file

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct Scenario {
  CNOTCell cell;  // molecule, solution, cell and fields sections; gamma from beams
  LinearPolarizationAngle tau;
  RunSpec run;
  SweepSpec sweep;
  McSpec mc;
  OutputSpec output;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline CalibrationProblem calibration_problem(const Scenario& s) {
  CalibrationProblem p;
  p.cell = s.cell;
  p.free = s.run.free;
  p.lower = s.run.lower;
  p.upper = s.run.upper;
  p.grid = s.run.grid;
  p.min_winding = s.run.min_winding;
  p.max_winding = s.run.max_winding;
  p.tolerance = s.run.residual_tolerance;
  p.max_evaluations = s.run.max_evaluations;
  return p;
}

enum class Severity { error, warning };

struct ParseDiagnostic {
  int line = 1;    // 1-based
  int column = 1;  // 1-based
  std::string message;
  Severity severity = Severity::error;
};

struct ParseResult {
  std::optional<Scenario> scenario;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return scenario.has_value(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

inline std::optional<double> parse_angle(std::string_view s) {
  s = trim(s);
  double scale = 1.0;
  auto strip = [&](std::string_view suffix) {
    if (s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix) {
      s = trim(s.substr(0, s.size() - suffix.size()));
      return true;
    }
    return false;
  };
  if (strip("deg")) {
    scale = kPi / 180.0;
  } else {
    strip("rad");
  }
  const auto v = parse_real(s);
  if (!v) return std::nullopt;
  return scale == 1.0 ? *v : *v * scale;
}

inline std::optional<std::uint64_t> parse_count(std::string_view s) {
  const auto v = parse_real(s);
  if (!v || *v < 0.0 || *v > 9007199254740992.0 || std::floor(*v) != *v) return std::nullopt;
  return static_cast<std::uint64_t>(*v);
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> items;
  while (true) {
    const auto comma = s.find(',');
    items.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return items;
}

inline std::optional<std::vector<double>> parse_real_list(std::string_view s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (auto item : split_list(s)) {
    const auto v = parse_real(item);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

/// Applies a raw value to the scenario; returns an error message on failure.
using KeyHandler = std::function<std::optional<std::string>(std::string_view, Scenario&)>;

struct KeySpec {
  std::string_view name;
  bool required;
  KeyHandler apply;
};

struct SectionSpec {
  std::string_view name;
  bool required;
  std::vector<KeySpec> keys;
};

inline KeyHandler real_key(std::function<double&(Scenario&)> field,
                           std::function<bool(double)> check, std::string constraint) {
  return [=](std::string_view raw, Scenario& s) -> std::optional<std::string> {
    const auto v = parse_real(raw);
    if (!v) return "expected a number, got '" + std::string(raw) + "'";
    if (!check(*v)) return "value " + std::string(raw) + " violates " + constraint;
    field(s) = *v;
    return std::nullopt;
  };
}

inline KeyHandler angle_key(std::function<void(Scenario&, double)> assign,
                            std::function<bool(double)> check = {}, std::string constraint = {}) {
  return [=](std::string_view raw, Scenario& s) -> std::optional<std::string> {
    const auto v = parse_angle(raw);
    if (!v) return "expected an angle (number with optional deg/rad suffix), got '" +
                   std::string(raw) + "'";
    if (check && !check(*v)) return "value " + std::string(raw) + " violates " + constraint;
    assign(s, *v);
    return std::nullopt;
  };
}

inline KeyHandler count_key(std::function<std::uint64_t&(Scenario&)> field,
                            std::uint64_t minimum) {
  return [=](std::string_view raw, Scenario& s) -> std::optional<std::string> {
    const auto v = parse_count(raw);
    if (!v) return "expected a non-negative integer, got '" + std::string(raw) + "'";
    if (*v < minimum) return "value must be >= " + std::to_string(minimum);
    field(s) = *v;
    return std::nullopt;
  };
}

inline KeyHandler string_key(std::function<std::string&(Scenario&)> field) {
  return [=](std::string_view raw, Scenario& s) -> std::optional<std::string> {
    field(s) = std::string(raw);
    return std::nullopt;
  };
}

inline KeyHandler pair_key(std::function<std::array<double, 2>&(Scenario&)> field) {
  return [=](std::string_view raw, Scenario& s) -> std::optional<std::string> {
    const auto v = parse_real_list(raw);
    if (!v || v->size() != 2) return "expected two comma-separated numbers";
    if ((*v)[0] < 0.0 || (*v)[1] < 0.0) return "bounds must be >= 0";
    field(s) = {(*v)[0], (*v)[1]};
    return std::nullopt;
  };
}

inline const std::vector<SectionSpec>& scenario_grammar() {
  static const std::vector<SectionSpec> grammar = [] {
    const auto positive = [](double v) { return v > 0.0; };
    const auto non_negative = [](double v) { return v >= 0.0; };
    std::vector<SectionSpec> g;
    g.push_back({"molecule", true,
                 {{"kappa", true, real_key([](Scenario& s) -> double& { return s.cell.solution.molecule.kappa; }, non_negative, "kappa >= 0")},
                  {"m", true, real_key([](Scenario& s) -> double& { return s.cell.solution.molecule.m; }, positive, "m > 0")},
                  {"p", true, real_key([](Scenario& s) -> double& { return s.cell.solution.molecule.p; }, positive, "p > 0")},
                  {"sigma0", true, real_key([](Scenario& s) -> double& { return s.cell.solution.molecule.sigma0; }, non_negative, "sigma0 >= 0")}}});
    g.push_back({"solution", true,
                 {{"T", true, real_key([](Scenario& s) -> double& { return s.cell.solution.T; }, positive, "T > 0")},
                  {"n", true, real_key([](Scenario& s) -> double& { return s.cell.solution.n; }, positive, "n > 0")},
                  {"units", false, [](std::string_view raw, Scenario& s) -> std::optional<std::string> {
                     if (raw == "si") s.cell.solution.units = UnitSystem::si;
                     else if (raw == "natural") s.cell.solution.units = UnitSystem::natural;
                     else return "units must be 'si' or 'natural'";
                     return std::nullopt;
                   }}}});
    g.push_back({"cell", true,
                 {{"L", true, real_key([](Scenario& s) -> double& { return s.cell.geometry.L; }, positive, "L > 0")}}});
    g.push_back({"fields", true,
                 {{"B", true, real_key([](Scenario& s) -> double& { return s.cell.fields.B; }, non_negative, "B >= 0")},
                  {"E_C", true, real_key([](Scenario& s) -> double& { return s.cell.fields.E_C; }, non_negative, "E_C >= 0")},
                  {"ideal_b", false, [](std::string_view raw, Scenario& s) -> std::optional<std::string> {
                     if (raw == "true") s.cell.fields.ideal_b = true;
                     else if (raw == "false") s.cell.fields.ideal_b = false;
                     else return "ideal_b must be 'true' or 'false'";
                     return std::nullopt;
                   }}}});
    g.push_back({"beams", false,
                 {{"gamma", false, angle_key([](Scenario& s, double v) { s.cell.fields.gamma = LinearPolarizationAngle(v); })},
                  {"tau", false, angle_key([](Scenario& s, double v) { s.tau = LinearPolarizationAngle(v); })}}});
    g.push_back({"run", true,
                 {{"engine", false, [](std::string_view raw, Scenario& s) -> std::optional<std::string> {
                     if (raw == "ideal") s.run.engine = EngineKind::ideal;
                     else if (raw == "physical") s.run.engine = EngineKind::physical;
                     else return "engine must be 'ideal' or 'physical'";
                     return std::nullopt;
                   }},
                  {"free", false, [](std::string_view raw, Scenario& s) -> std::optional<std::string> {
                     const auto items = split_list(raw);
                     if (items.size() != 2) return "expected two free parameters from {L, E_C, n, T}";
                     std::array<CalibrationParameter, 2> free{};
                     for (std::size_t i = 0; i < 2; ++i) {
                       const auto p = parse_parameter(items[i]);
                       if (!p) return "unknown calibration parameter '" + std::string(items[i]) + "'";
                       free[i] = *p;
                     }
                     if (free[0] == free[1]) return "free parameters must differ";
                     s.run.free = free;
                     return std::nullopt;
                   }},
                  {"grid", false, [](std::string_view raw, Scenario& s) -> std::optional<std::string> {
                     const auto v = parse_count(raw);
                     if (!v || *v < 2 || *v > 100000) return "grid must be an integer in [2, 100000]";
                     s.run.grid = static_cast<int>(*v);
                     return std::nullopt;
                   }},
                  {"kind", true, [](std::string_view raw, Scenario& s) -> std::optional<std::string> {
                     const auto k = parse_run_kind(raw);
                     if (!k) return "kind must be one of simulate, truth-table, calibrate, sweep, oracle";
                     s.run.kind = *k;
                     return std::nullopt;
                   }},
                  {"lower", false, pair_key([](Scenario& s) -> std::array<double, 2>& { return s.run.lower; })},
                  {"max_evaluations", false, count_key([](Scenario& s) -> std::uint64_t& { return s.run.max_evaluations; }, 1)},
                  {"max_winding", false, angle_key([](Scenario& s, double v) { s.run.max_winding = v; }, [](double v) { return v > 0.0; }, "max_winding > 0")},
                  {"min_winding", false, angle_key([](Scenario& s, double v) { s.run.min_winding = v; }, [](double v) { return v >= 0.0; }, "min_winding >= 0")},
                  {"residual_tolerance", false, real_key([](Scenario& s) -> double& { return s.run.residual_tolerance; }, positive, "residual_tolerance > 0")},
                  {"tolerance", false, real_key([](Scenario& s) -> double& { return s.run.tolerance; }, non_negative, "tolerance >= 0")},
                  {"upper", false, pair_key([](Scenario& s) -> std::array<double, 2>& { return s.run.upper; })}}});
    g.push_back({"sweep", false,
                 {{"parameter", false, [](std::string_view raw, Scenario& s) -> std::optional<std::string> {
                     if (raw != "T") return "only temperature sweeps are supported (parameter = T)";
                     s.sweep.parameter = std::string(raw);
                     return std::nullopt;
                   }},
                  {"values", false, [](std::string_view raw, Scenario& s) -> std::optional<std::string> {
                     const auto v = parse_real_list(raw);
                     if (!v) return "expected a comma-separated list of numbers";
                     for (std::size_t i = 0; i < v->size(); ++i) {
                       if ((*v)[i] <= 0.0) return "sweep values must be > 0";
                       if (i > 0 && (*v)[i] < (*v)[i - 1]) return "sweep values must be sorted";
                     }
                     s.sweep.values = *v;
                     return std::nullopt;
                   }}}});
    g.push_back({"mc", false,
                 {{"molecules_per_shot", false, count_key([](Scenario& s) -> std::uint64_t& { return s.mc.molecules_per_shot; }, 1)},
                  {"samples", false, count_key([](Scenario& s) -> std::uint64_t& { return s.mc.samples; }, 1)},
                  {"seed", false, count_key([](Scenario& s) -> std::uint64_t& { return s.mc.seed; }, 0)},
                  {"shots", false, count_key([](Scenario& s) -> std::uint64_t& { return s.mc.shots; }, 0)}}});
    g.push_back({"output", false,
                 {{"csv", false, string_key([](Scenario& s) -> std::string& { return s.output.csv; })},
                  {"dir", false, string_key([](Scenario& s) -> std::string& { return s.output.dir; })},
                  {"summary", false, string_key([](Scenario& s) -> std::string& { return s.output.summary; })}}});
    return g;
  }();
  return grammar;
}

}  // namespace detail

struct ParseOptions {
  /// Replaces the file's run kind (and makes the 'kind' key optional).
  std::optional<RunKind> kind;
};

/// Parse scenario text. On any error the scenario is empty and every
/// diagnostic found is returned.
inline ParseResult parse_scenario(std::string_view text, const ParseOptions& options = {}) {
  using detail::trim;
  ParseResult result;
  Scenario scenario;
  const auto& grammar = detail::scenario_grammar();

  struct Position {
    int line;
    int column;
  };
  std::map<std::string, Position, std::less<>> section_seen;
  std::map<std::string, Position, std::less<>> key_seen;  // "section.key"
  const detail::SectionSpec* current = nullptr;
  std::string current_name;
  bool in_unknown_section = false;

  auto error = [&](int line, int column, std::string message) {
    result.diagnostics.push_back({line, column, std::move(message), Severity::error});
  };

  int line_no = 0;
  std::size_t offset = 0;
  while (offset <= text.size()) {
    const auto end = text.find('\n', offset);
    std::string_view raw = text.substr(offset, end == std::string_view::npos ? text.npos : end - offset);
    ++line_no;
    offset = end == std::string_view::npos ? text.size() + 1 : end + 1;

    const auto hash = raw.find('#');
    const std::string_view content = raw.substr(0, hash);
    const std::string_view body = trim(content);
    if (body.empty()) continue;
    const int indent = static_cast<int>(content.find_first_not_of(" \t\r"));

    if (body.front() == '[') {
      current = nullptr;
      current_name.clear();
      in_unknown_section = true;
      if (body.back() != ']') {
        error(line_no, indent + 1, "malformed section header");
        continue;
      }
      const std::string name(trim(body.substr(1, body.size() - 2)));
      const auto it = std::find_if(grammar.begin(), grammar.end(),
                                   [&](const auto& s) { return s.name == name; });
      if (it == grammar.end()) {
        error(line_no, indent + 2, "unknown section [" + name + "]");
        continue;
      }
      if (section_seen.count(name)) {
        error(line_no, indent + 1, "duplicate section [" + name + "]");
      } else {
        section_seen[name] = {line_no, indent + 1};
      }
      current = &*it;
      current_name = name;
      in_unknown_section = false;
      continue;
    }

    const auto eq = content.find('=');
    if (eq == std::string_view::npos) {
      error(line_no, indent + 1, "expected 'key = value'");
      continue;
    }
    const std::string key(trim(content.substr(0, eq)));
    const std::string_view value_raw = content.substr(eq + 1);
    const std::string_view value = trim(value_raw);
    const auto value_lead = value_raw.find_first_not_of(" \t\r");
    // An empty value is reported at the '=' sign.
    const int value_column = value_lead == std::string_view::npos
                                 ? static_cast<int>(eq) + 1
                                 : static_cast<int>(eq + value_lead) + 2;
    if (key.empty()) {
      error(line_no, indent + 1, "missing key before '='");
      continue;
    }
    if (current == nullptr) {
      // Keys under an unknown or malformed header are covered by its diagnostic.
      if (!in_unknown_section) error(line_no, indent + 1, "key '" + key + "' outside of any section");
      continue;
    }
    const auto spec = std::find_if(current->keys.begin(), current->keys.end(),
                                   [&](const auto& k) { return k.name == key; });
    if (spec == current->keys.end()) {
      error(line_no, indent + 1, "unknown key '" + key + "' in section [" + current_name + "]");
      continue;
    }
    const std::string qualified = current_name + "." + key;
    if (key_seen.count(qualified)) {
      error(line_no, indent + 1, "duplicate key '" + key + "' in section [" + current_name + "]");
      continue;
    }
    key_seen[qualified] = {line_no, indent + 1};
    if (auto message = spec->apply(value, scenario)) {
      error(line_no, value_column, key + ": " + *message);
    }
  }

  // Missing sections and keys point at the section header when there is one.
  for (const auto& section : grammar) {
    const auto seen = section_seen.find(section.name);
    if (seen == section_seen.end()) {
      if (section.required) {
        error(1, 1, "missing required section [" + std::string(section.name) + "]");
      }
      continue;
    }
    for (const auto& key : section.keys) {
      if (options.kind && section.name == "run" && key.name == "kind") continue;
      if (key.required && !key_seen.count(std::string(section.name) + "." + std::string(key.name))) {
        error(seen->second.line, seen->second.column,
              "missing required key '" + std::string(key.name) + "' in section [" +
                  std::string(section.name) + "]");
      }
    }
  }

  if (options.kind) scenario.run.kind = *options.kind;

  // Cross-key constraints.
  if (const auto run = section_seen.find("run"); run != section_seen.end()) {
    const auto [line, column] = run->second;
    const bool needs_box =
        scenario.run.kind == RunKind::calibrate || scenario.run.kind == RunKind::sweep;
    if (needs_box && (!key_seen.count("run.lower") || !key_seen.count("run.upper"))) {
      error(line, column, "run kind '" + std::string(run_kind_name(scenario.run.kind)) +
                              "' requires 'lower' and 'upper' in section [run]");
    }
    for (std::size_t i = 0; i < 2; ++i) {
      if (!(scenario.run.upper[i] > scenario.run.lower[i])) {
        error(line, column, "bounds must satisfy lower < upper for every free parameter");
        break;
      }
    }
    if (!(scenario.run.max_winding > scenario.run.min_winding)) {
      error(line, column, "max_winding must exceed min_winding");
    }
    if (scenario.run.kind == RunKind::sweep) {
      if (scenario.sweep.values.empty()) {
        const auto sweep = section_seen.find("sweep");
        const Position at = sweep != section_seen.end() ? sweep->second : run->second;
        error(at.line, at.column, "run kind 'sweep' requires a non-empty 'values' in section [sweep]");
      }
      if (scenario.run.free[0] == CalibrationParameter::T ||
          scenario.run.free[1] == CalibrationParameter::T) {
        error(line, column, "a temperature sweep cannot calibrate T");
      }
    }
  }

  if (result.diagnostics.empty()) result.scenario = std::move(scenario);
  return result;
}

/// Canonical text form: sections in fixed order, keys sorted, every value
/// written (angles in radians) with shortest round-trip precision.
inline std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  auto kv = [&](std::string_view key, const std::string& value) {
    out << key << (value.empty() ? " =" : " = ") << value << '\n';
  };
  auto pair = [](const std::array<double, 2>& v) {
    return format_double(v[0]) + ", " + format_double(v[1]);
  };
  const auto& mol = s.cell.solution.molecule;
  out << "[molecule]\n";
  kv("kappa", format_double(mol.kappa));
  kv("m", format_double(mol.m));
  kv("p", format_double(mol.p));
  kv("sigma0", format_double(mol.sigma0));
  out << "\n[solution]\n";
  kv("T", format_double(s.cell.solution.T));
  kv("n", format_double(s.cell.solution.n));
  kv("units", s.cell.solution.units == UnitSystem::si ? "si" : "natural");
  out << "\n[cell]\n";
  kv("L", format_double(s.cell.geometry.L));
  out << "\n[fields]\n";
  kv("B", format_double(s.cell.fields.B));
  kv("E_C", format_double(s.cell.fields.E_C));
  kv("ideal_b", s.cell.fields.ideal_b ? "true" : "false");
  out << "\n[beams]\n";
  kv("gamma", format_double(s.cell.fields.gamma.radians()));
  kv("tau", format_double(s.tau.radians()));
  out << "\n[run]\n";
  kv("engine", s.run.engine == EngineKind::ideal ? "ideal" : "physical");
  kv("free", std::string(parameter_name(s.run.free[0])) + ", " +
                 std::string(parameter_name(s.run.free[1])));
  kv("grid", std::to_string(s.run.grid));
  kv("kind", std::string(run_kind_name(s.run.kind)));
  kv("lower", pair(s.run.lower));
  kv("max_evaluations", format_count(s.run.max_evaluations));
  kv("max_winding", format_double(s.run.max_winding));
  kv("min_winding", format_double(s.run.min_winding));
  kv("residual_tolerance", format_double(s.run.residual_tolerance));
  kv("tolerance", format_double(s.run.tolerance));
  kv("upper", pair(s.run.upper));
  out << "\n[sweep]\n";
  kv("parameter", s.sweep.parameter);
  std::string values;
  for (std::size_t i = 0; i < s.sweep.values.size(); ++i) {
    if (i) values += ", ";
    values += format_double(s.sweep.values[i]);
  }
  kv("values", values);
  out << "\n[mc]\n";
  kv("molecules_per_shot", format_count(s.mc.molecules_per_shot));
  kv("samples", format_count(s.mc.samples));
  kv("seed", format_count(s.mc.seed));
  kv("shots", format_count(s.mc.shots));
  out << "\n[output]\n";
  kv("csv", s.output.csv);
  kv("dir", s.output.dir);
  kv("summary", s.output.summary);
  return out.str();
}

}  // namespace polcnot
