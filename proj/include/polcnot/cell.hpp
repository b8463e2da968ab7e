#pragma once
// Beam propagation through the CNOT cell. The control beam travels along B and
// leaves unchanged; the target beam travels perpendicular to B and is rotated
// by rho(gamma) * L, where rho depends on the control polarization gamma
// through the alignment of the polarization density.

#include <cmath>
#include <cstdint>
#include <vector>

#include "polcnot/angle.hpp"
#include "polcnot/medium.hpp"
#include "polcnot/random.hpp"

namespace polcnot {

struct CellGeometry {
  double L = 1.0;  // path length, m

  friend bool operator==(const CellGeometry&, const CellGeometry&) = default;
};

struct CNOTCell {
  CellGeometry geometry;
  Solution solution;
  FieldConfig fields;

  void validate() const {
    detail::require(std::isfinite(geometry.L) && geometry.L > 0.0, "cell: L must be > 0");
    solution.validate();
    fields.validate();
  }

  friend bool operator==(const CNOTCell&, const CNOTCell&) = default;
};

struct PropagationResult {
  LinearPolarizationAngle out_angle;
  double total_rotation = 0.0;  // unwound, radians
  double rotatory_power = 0.0;  // rad/m
};

/// Weight of the alignment term as a function of the control polarization.
using AlignmentModel = double (*)(LinearPolarizationAngle);

/// cos^2(gamma): 1 when the control polarization lies along the target
/// propagation axis, 0 when perpendicular to it.
inline double alignment_factor(LinearPolarizationAngle gamma) {
  const double c = std::cos(gamma.radians());
  return c * c;
}

/// Split of rho into its gamma-independent and alignment parts.
struct RotatoryTerms {
  double baseline = 0.0;   // n sigma0
  double alignment = 0.0;  // kappa A P, multiplied by g(gamma)
};

inline RotatoryTerms rotatory_terms(const CNOTCell& cell) {
  cell.validate();
  const Solution& sol = cell.solution;
  const double P = langevin_debye_polarization(sol, cell.fields.E_C);
  return {sol.n * sol.molecule.sigma0, sol.molecule.kappa * order_parameter(sol, cell.fields) * P};
}

inline double rotatory_power(const CNOTCell& cell, LinearPolarizationAngle gamma,
                             AlignmentModel g = alignment_factor) {
  const RotatoryTerms t = rotatory_terms(cell);
  return t.baseline + t.alignment * g(gamma);
}

inline PropagationResult propagate_control(const CNOTCell& cell, LinearPolarizationAngle gamma) {
  cell.validate();
  return {gamma, 0.0, 0.0};
}

inline PropagationResult propagate_target(const CNOTCell& cell, LinearPolarizationAngle tau,
                                          LinearPolarizationAngle gamma,
                                          AlignmentModel g = alignment_factor) {
  const double rho = rotatory_power(cell, gamma, g);
  const double total = rho * cell.geometry.L;
  return {rotate_angle(tau, total), total, rho};
}

struct CellOutput {
  LinearPolarizationAngle control;
  LinearPolarizationAngle target;
  PropagationResult target_detail;
};

/// Both beams see the same cell state.
inline CellOutput simulate_cell(const CNOTCell& cell, LinearPolarizationAngle gamma,
                                LinearPolarizationAngle tau) {
  const PropagationResult control = propagate_control(cell, gamma);
  const PropagationResult target = propagate_target(cell, tau, gamma);
  return {control.out_angle, target.out_angle, target};
}

/// Seed of shot `shot` in a shot sequence started from `seed`.
constexpr std::uint64_t shot_seed(std::uint64_t seed, std::uint64_t shot) {
  return detail::mix64(seed + (shot + 1) * detail::kGoldenGamma);
}

/// Thermal-noise study: in each shot the analytic polarization density is
/// rescaled by the ratio of a sampled mean dipole alignment (over
/// `molecules_per_shot` draws) to its exact Boltzmann value, so shots scatter
/// around the analytic result and converge to it as the draw count grows.
inline std::vector<PropagationResult> mc_shot_distribution(const CNOTCell& cell,
                                                           LinearPolarizationAngle gamma,
                                                           LinearPolarizationAngle tau,
                                                           std::uint64_t shots,
                                                           std::uint64_t molecules_per_shot,
                                                           std::uint64_t seed,
                                                           unsigned threads = 0) {
  detail::require(shots >= 1, "shots must be >= 1");
  detail::require(molecules_per_shot >= 1, "molecules_per_shot must be >= 1");
  const RotatoryTerms terms = rotatory_terms(cell);
  const double bias = orientation_bias(cell.solution, cell.fields.E_C);
  const double exact_alignment = mean_dipole_alignment(bias);
  const double g = alignment_factor(gamma);

  std::vector<PropagationResult> out;
  out.reserve(shots);
  for (std::uint64_t s = 0; s < shots; ++s) {
    double scale = 0.0;
    if (bias > 0.0) {
      const DipoleMoments m =
          sample_dipole_moments(bias, molecules_per_shot, shot_seed(seed, s), threads);
      scale = (m.sum_cos / static_cast<double>(m.count)) / exact_alignment;
    }
    const double rho = terms.baseline + terms.alignment * scale * g;
    const double total = rho * cell.geometry.L;
    out.push_back({rotate_angle(tau, total), total, rho});
  }
  return out;
}

}  // namespace polcnot
