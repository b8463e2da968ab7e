#pragma once
// The triactive-molecule solution: the Langevin-Debye polarization density of
// the bench model, and a Monte Carlo Boltzmann orientation sampler used as an
// independent reference for it.
//
// In ideal-B mode the magnetic moments precess about B, which confines every
// electric dipole to the plane perpendicular to B. The in-plane dipole angle
// then follows exp(x cos(phi - gamma)) with x = p E_C / (k T).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "polcnot/angle.hpp"
#include "polcnot/error.hpp"
#include "polcnot/random.hpp"

namespace polcnot {

/// Exact SI Boltzmann constant, J/K.
inline constexpr double kBoltzmannSI = 1.380649e-23;

/// SI uses kBoltzmannSI; natural units set k = 1 (so T is an energy).
enum class UnitSystem { si, natural };

constexpr double boltzmann_constant(UnitSystem units) {
  return units == UnitSystem::si ? kBoltzmannSI : 1.0;
}

/// Electric dipole p (C m), magnetic moment m (J/T) perpendicular to p, and
/// an optical-activity axis parallel to p. sigma0 is the baseline rotation per
/// unit length per unit number density; kappa is the extra rotation per unit
/// length per unit polarization density.
struct TriactiveMolecule {
  double p = 1.0;
  double m = 1.0;
  double sigma0 = 1.0;
  double kappa = 1.0;

  void validate() const {
    detail::require(std::isfinite(p) && p > 0.0, "molecule: p must be > 0");
    detail::require(std::isfinite(m) && m > 0.0, "molecule: m must be > 0");
    detail::require(std::isfinite(sigma0) && sigma0 >= 0.0, "molecule: sigma0 must be >= 0");
    detail::require(std::isfinite(kappa) && kappa >= 0.0, "molecule: kappa must be >= 0");
  }

  friend bool operator==(const TriactiveMolecule&, const TriactiveMolecule&) = default;
};

struct Solution {
  TriactiveMolecule molecule;
  double n = 1.0;  // number density, m^-3
  double T = 1.0;  // temperature, K (energy in natural units)
  UnitSystem units = UnitSystem::si;

  double thermal_energy() const { return boltzmann_constant(units) * T; }

  void validate() const {
    molecule.validate();
    detail::require(std::isfinite(n) && n > 0.0, "solution: n must be > 0");
    detail::require(std::isfinite(T) && T > 0.0, "solution: T must be > 0");
  }

  friend bool operator==(const Solution&, const Solution&) = default;
};

/// B lies along the control-beam axis. gamma is the control polarization.
struct FieldConfig {
  double B = 0.0;
  double E_C = 0.0;
  LinearPolarizationAngle gamma;
  /// Treat the precession lock as perfect (order parameter 1).
  bool ideal_b = false;

  void validate() const {
    detail::require(std::isfinite(B) && B >= 0.0, "fields: B must be >= 0");
    detail::require(std::isfinite(E_C) && E_C >= 0.0, "fields: E_C must be >= 0");
  }

  friend bool operator==(const FieldConfig&, const FieldConfig&) = default;
};

/// Mean polarization density <|P|> = n p^2 pi E_C / (sqrt(2) k T), C/m^2.
inline double langevin_debye_polarization(const Solution& sol, double E_C) {
  sol.validate();
  detail::require(std::isfinite(E_C) && E_C >= 0.0, "E_C must be >= 0");
  const double p = sol.molecule.p;
  return sol.n * p * p * kPi * E_C / (std::numbers::sqrt2 * sol.thermal_energy());
}

/// Dimensionless orientation bias x = p E_C / (k T).
inline double orientation_bias(const Solution& sol, double E_C) {
  sol.validate();
  detail::require(std::isfinite(E_C) && E_C >= 0.0, "E_C must be >= 0");
  return sol.molecule.p * E_C / sol.thermal_energy();
}

namespace detail {

/// I0(x) exp(-x), finite for all x >= 0.
inline double scaled_bessel_i0(double x) {
  if (x < 600.0) return std::cyl_bessel_i(0.0, x) * std::exp(-x);
  const double t = 1.0 / (8.0 * x);
  return (1.0 + t * (1.0 + t * (9.0 / 2.0 + t * 225.0 / 6.0))) / std::sqrt(2.0 * kPi * x);
}

}  // namespace detail

/// Exact 2D Boltzmann average <cos(phi - gamma)> = I1(x) / I0(x).
inline double mean_dipole_alignment(double x) {
  detail::require(std::isfinite(x) && x >= 0.0, "orientation bias must be >= 0");
  if (x == 0.0) return 0.0;
  if (x < 600.0) return std::cyl_bessel_i(1.0, x) / std::cyl_bessel_i(0.0, x);
  return 1.0 - 1.0 / (2.0 * x) - 1.0 / (8.0 * x * x) - 1.0 / (8.0 * x * x * x);
}

/// Normalized density of the in-plane dipole angle on [0, 2 pi).
class OrientationPdf {
 public:
  OrientationPdf(double bias, LinearPolarizationAngle gamma)
      : bias_(bias), gamma_(gamma.radians()), norm_(2.0 * kPi * detail::scaled_bessel_i0(bias)) {
    detail::require(std::isfinite(bias) && bias >= 0.0, "orientation bias must be >= 0");
  }

  double operator()(double phi_mol) const {
    return std::exp(bias_ * (std::cos(phi_mol - gamma_) - 1.0)) / norm_;
  }

  double bias() const { return bias_; }
  double mode() const { return gamma_; }

 private:
  double bias_;
  double gamma_;
  double norm_;
};

inline OrientationPdf orientation_pdf(const Solution& sol, const FieldConfig& fields) {
  fields.validate();
  return OrientationPdf(orientation_bias(sol, fields.E_C), fields.gamma);
}

/// Draw one in-plane dipole angle (radians, unreduced) from the von Mises
/// shaped orientation density centred on `mode`.
///
/// Small biases use a uniform envelope with acceptance exp(x (cos - 1));
/// otherwise the wrapped-Cauchy envelope of Best and Fisher. Both are exact.
inline double sample_orientation(double bias, double mode, CounterRng& rng) {
  if (bias == 0.0) return 2.0 * kPi * rng.uniform();
  if (bias < 1e-3) {
    for (;;) {
      const double phi = 2.0 * kPi * rng.uniform();
      if (rng.uniform() < std::exp(bias * (std::cos(phi) - 1.0))) return phi + mode;
    }
  }
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * bias * bias);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * bias);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform_open();
    const double u3 = rng.uniform();
    const double z = std::cos(kPi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = bias * (r - f);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double a = std::acos(std::clamp(f, -1.0, 1.0));
      return (u3 < 0.5 ? -a : a) + mode;
    }
  }
}

/// Sample-mean unit dipole, accumulated in fixed blocks.
struct DipoleMoments {
  double sum_cos = 0.0;  // along gamma
  double sum_sin = 0.0;  // perpendicular to gamma
  double sum_cos2 = 0.0;
  std::uint64_t count = 0;
};

inline constexpr std::uint64_t kSamplesPerBlock = 1u << 16;

namespace detail {

inline DipoleMoments sample_block(double bias, std::uint64_t seed, std::uint64_t block,
                                  std::uint64_t count) {
  CounterRng rng(seed, block);
  DipoleMoments m;
  for (std::uint64_t i = 0; i < count; ++i) {
    // Sample relative to gamma so the sums are taken in the gamma frame.
    const double phi = sample_orientation(bias, 0.0, rng);
    const double c = std::cos(phi);
    m.sum_cos += c;
    m.sum_sin += std::sin(phi);
    m.sum_cos2 += c * c;
  }
  m.count = count;
  return m;
}

}  // namespace detail

/// Draw `samples` dipole angles for stream `seed`. Block b always uses
/// stream b and partial sums are combined in block order, so the result does
/// not depend on `threads`.
inline DipoleMoments sample_dipole_moments(double bias, std::uint64_t samples, std::uint64_t seed,
                                           unsigned threads = 0) {
  detail::require(samples >= 1, "samples must be >= 1");
  detail::require(std::isfinite(bias) && bias >= 0.0, "orientation bias must be >= 0");
  const std::uint64_t blocks = (samples + kSamplesPerBlock - 1) / kSamplesPerBlock;
  std::vector<DipoleMoments> partial(blocks);
  auto work = [&](std::uint64_t first, std::uint64_t stride) {
    for (std::uint64_t b = first; b < blocks; b += stride) {
      const std::uint64_t count = std::min(kSamplesPerBlock, samples - b * kSamplesPerBlock);
      partial[b] = detail::sample_block(bias, seed, b, count);
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, blocks));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  DipoleMoments total;
  for (const auto& p : partial) {
    total.sum_cos += p.sum_cos;
    total.sum_sin += p.sum_sin;
    total.sum_cos2 += p.sum_cos2;
    total.count += p.count;
  }
  return total;
}

struct McPolarization {
  double magnitude = 0.0;               // |P|, C/m^2
  LinearPolarizationAngle direction;    // direction of P (mod pi)
  double projection = 0.0;              // component of P along gamma
  double standard_error = 0.0;          // of `projection`
  std::uint64_t samples = 0;
};

/// Monte Carlo estimate n p <u> of the polarization density, where u is the
/// unit dipole drawn from the orientation density.
inline McPolarization mc_mean_polarization(const Solution& sol, const FieldConfig& fields,
                                           std::uint64_t samples, std::uint64_t seed,
                                           unsigned threads = 0) {
  fields.validate();
  const double bias = orientation_bias(sol, fields.E_C);
  const DipoleMoments m = sample_dipole_moments(bias, samples, seed, threads);
  const double count = static_cast<double>(m.count);
  const double scale = sol.n * sol.molecule.p;
  const double mean_cos = m.sum_cos / count;
  const double mean_sin = m.sum_sin / count;
  const double var_cos = std::max(0.0, m.sum_cos2 / count - mean_cos * mean_cos);

  McPolarization out;
  out.samples = m.count;
  out.projection = scale * mean_cos;
  out.magnitude = scale * std::hypot(mean_cos, mean_sin);
  out.direction = LinearPolarizationAngle(fields.gamma.radians() + std::atan2(mean_sin, mean_cos));
  out.standard_error = m.count > 1 ? scale * std::sqrt(var_cos / (count - 1.0)) : 0.0;
  return out;
}

struct OracleReport {
  double bias = 0.0;                  // x = p E_C / (k T)
  double formula_polarization = 0.0;    // Langevin-Debye formula
  double mc_polarization = 0.0;       // Monte Carlo |P|
  double mc_standard_error = 0.0;
  double boltzmann_polarization = 0.0;  // n p I1(x)/I0(x)
  std::optional<double> ratio;        // formula / MC; empty when MC is zero
  std::uint64_t samples = 0;
};

/// Compare the printed formula against the sampled Boltzmann average. In the
/// linear regime the ratio tends to pi * sqrt(2).
inline OracleReport oracle_compare(const Solution& sol, double E_C, std::uint64_t samples,
                                   std::uint64_t seed, unsigned threads = 0) {
  FieldConfig fields;
  fields.E_C = E_C;
  OracleReport r;
  r.bias = orientation_bias(sol, E_C);
  r.formula_polarization = langevin_debye_polarization(sol, E_C);
  r.boltzmann_polarization = sol.n * sol.molecule.p * mean_dipole_alignment(r.bias);
  r.samples = samples;
  if (E_C == 0.0) {
    // Zero field: both sides vanish by symmetry and the ratio is undefined.
    detail::require(samples >= 1, "samples must be >= 1");
    return r;
  }
  const McPolarization mc = mc_mean_polarization(sol, fields, samples, seed, threads);
  r.mc_polarization = mc.magnitude;
  r.mc_standard_error = mc.standard_error;
  if (mc.magnitude > 0.0) r.ratio = r.formula_polarization / mc.magnitude;
  return r;
}

/// Langevin function coth(x) - 1/x.
inline double langevin_function(double x) {
  if (x < 1e-3) return x / 3.0 - x * x * x / 45.0;
  if (x > 40.0) return 1.0 - 1.0 / x;  // coth(x) == 1 to double precision
  return 1.0 / std::tanh(x) - 1.0 / x;
}

/// Degree of magnetic-moment alignment with B, x = m B / (k T).
inline double b_field_order_parameter(const TriactiveMolecule& molecule, double B, double T,
                                      UnitSystem units = UnitSystem::si) {
  molecule.validate();
  detail::require(std::isfinite(B) && B >= 0.0, "B must be >= 0");
  detail::require(std::isfinite(T) && T > 0.0, "T must be > 0");
  return langevin_function(molecule.m * B / (boltzmann_constant(units) * T));
}

/// Order parameter applied to the alignment term: 1 in ideal-B mode.
inline double order_parameter(const Solution& sol, const FieldConfig& fields) {
  if (fields.ideal_b) return 1.0;
  return b_field_order_parameter(sol.molecule, fields.B, sol.T, sol.units);
}

}  // namespace polcnot
