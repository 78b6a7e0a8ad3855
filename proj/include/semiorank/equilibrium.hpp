#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "semiorank/core.hpp"
#include "semiorank/errors.hpp"

namespace semiorank {

enum class Branch { POSITIVE_T, NEGATIVE_T };

inline const char* to_string(Branch b) {
  return b == Branch::NEGATIVE_T ? "negative_T" : "positive_T";
}

/// Solved (beta, nu) of the two-constraint occupation system, plus residual
/// bookkeeping. branch == NEGATIVE_T iff beta < 0 iff the energy budget sits
/// above the uniform mean N*omega_bar. For s == 1 the two constraints
/// collapse to one; the solver then reports beta = 0 and underdetermined.
struct EquilibriumParams {
  double beta = 0.0;
  double nu = 0.0;
  Branch branch = Branch::POSITIVE_T;
  double residual_norm = 0.0;
  int iterations = 0;
  bool underdetermined = false;
};

/// Cumulative theoretical curve phi[l] = sum_{i<=l} 1/(exp(beta*omega_i - nu) - 1).
struct OccupationCurve {
  std::vector<double> phi;
};

/// Single-bin occupation 1/(exp(beta*omega - nu) - 1); requires
/// beta*omega - nu > 0 for a positive, finite value.
inline double occupation(double omega, double beta, double nu) {
  const double x = beta * omega - nu;
  if (!(x > 0.0))
    throw DomainError("occupation undefined: beta*omega - nu = " + std::to_string(x) +
                      " must be positive");
  return 1.0 / std::expm1(x);
}

inline double occupation(double omega, const EquilibriumParams& p) {
  return occupation(omega, p.beta, p.nu);
}

namespace detail {

// Occupation without the domain throw; exp overflow maps to 0, which is the
// correct limit for a far-off bin.
inline double occupation_raw(double omega, double beta, double nu) {
  const double x = beta * omega - nu;
  const double e = std::expm1(x);
  return std::isinf(e) ? 0.0 : 1.0 / e;
}

inline double total_occupation(const CardinalitySpectrum& spec, double beta, double nu) {
  return compensated_sum(static_cast<std::size_t>(spec.size()), [&](std::size_t i) {
    return occupation_raw(spec.values()[i], beta, nu);
  });
}

inline double total_energy(const CardinalitySpectrum& spec, double beta, double nu) {
  return compensated_sum(static_cast<std::size_t>(spec.size()), [&](std::size_t i) {
    return spec.values()[i] * occupation_raw(spec.values()[i], beta, nu);
  });
}

// Domain boundary: occupations are valid for nu < min_i beta*omega_i.
inline double nu_domain_edge(const CardinalitySpectrum& spec, double beta) {
  return beta >= 0.0 ? beta * spec.min_value() : beta * spec.max_value();
}

} // namespace detail

struct SolverOptions {
  double inner_tol_abs = 1e-10; // on |sum occ - N|
  double outer_tol_rel = 1e-8;  // on residuals relative to N and energia
  int max_iterations = 200;     // per 1-D solve
};

/// Solve the normalization equation sum_i 1/(exp(beta*omega_i - nu) - 1) = N
/// for nu at fixed beta. The total occupation is strictly increasing in nu on
/// the valid domain (-inf, min_i beta*omega_i), diverging at the upper edge
/// and vanishing at -inf, so a bisection bracket always exists.
inline double solve_nu_given_beta(const CardinalitySpectrum& spec, std::int64_t n,
                                  double beta, const SolverOptions& opts = {}) {
  if (n < 1) throw DomainError("solve_nu_given_beta: N must be >= 1");
  const double target = static_cast<double>(n);
  const double edge = detail::nu_domain_edge(spec, beta);

  double delta = 1e-12 * (1.0 + std::abs(beta) * spec.max_value());
  double hi = edge - delta;
  int guard = 0;
  while (detail::total_occupation(spec, beta, hi) < target) {
    delta *= 0.5;
    hi = edge - delta;
    if (++guard > 200)
      throw SolverError("solve_nu_given_beta: cannot push upper bracket above N");
  }

  double step = 1.0 + std::abs(edge);
  double lo = edge - step;
  guard = 0;
  while (detail::total_occupation(spec, beta, lo) >= target) {
    step *= 2.0;
    lo = edge - step;
    if (++guard > 200)
      throw SolverError("solve_nu_given_beta: cannot push lower bracket below N");
  }

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < opts.max_iterations; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = detail::total_occupation(spec, beta, mid);
    if (std::abs(f - target) <= opts.inner_tol_abs) return mid;
    if (f < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid)))
      return mid; // bracket collapsed: best representable root
  }
  return mid;
}

/// Solve the coupled system
///   sum_i 1/(exp(beta*omega_i - nu) - 1)          = N
///   sum_i omega_i/(exp(beta*omega_i - nu) - 1)    = energia
/// by an outer bisection on beta (energy equation) with nu(beta) from the
/// inner normalization solve. The constrained energy E(beta) is strictly
/// decreasing in beta with range (N*omega_min, N*omega_max), and E(0) equals
/// the uniform mean N*omega_bar, which fixes the sign of beta and gives the
/// expansion direction for the outer bracket.
inline EquilibriumParams solve_equilibrium(const CardinalitySpectrum& spec, std::int64_t n,
                                           const EnergiaConstraint& constraint,
                                           const SolverOptions& opts = {}) {
  if (n < 1) throw DomainError("solve_equilibrium: N must be >= 1");
  const double nd = static_cast<double>(n);
  const double energia = constraint.energia;
  const double uniform_mean_energy = nd * spec.mean();
  const std::int64_t s = spec.size();

  auto relative_residuals = [&](double beta, double nu) {
    const double rn = std::abs(detail::total_occupation(spec, beta, nu) - nd) / nd;
    const double re = std::abs(detail::total_energy(spec, beta, nu) - energia) /
                      std::max(std::abs(energia), 1e-300);
    return std::max(rn, re);
  };

  if (s == 1) {
    // One bin: normalization alone pins nu; the energy equation is either
    // redundant or unsatisfiable, so beta is reported as 0 and flagged.
    EquilibriumParams p;
    p.beta = 0.0;
    p.nu = -std::log1p(1.0 / nd);
    p.branch = Branch::POSITIVE_T;
    p.underdetermined = true;
    p.iterations = 0;
    p.residual_norm = relative_residuals(p.beta, p.nu);
    return p;
  }

  if (!constraint.admissible_for(spec, n))
    throw DomainError("solve_equilibrium: energia outside the admissible window for " +
                      std::string(to_string(constraint.direction)));
  if (constraint.direction == Direction::AT_LEAST &&
      energia >= spec.max_value() * nd)
    throw DegenerateCondensationError(
        "solve_equilibrium: energia >= omega_max*N, all mass condenses into the top bin");
  if (constraint.direction == Direction::AT_MOST &&
      energia <= spec.min_value() * nd)
    throw DegenerateCondensationError(
        "solve_equilibrium: energia <= omega_min*N, all mass condenses into the bottom bin");

  // Exactly solvable boundary: energia == N*omega_bar gives beta = 0 with
  // uniform occupations N/s.
  const double beta0_nu = -std::log1p(static_cast<double>(s) / nd);
  if (energia == uniform_mean_energy ||
      std::abs(uniform_mean_energy - energia) <=
          opts.outer_tol_rel * std::max(std::abs(energia), 1e-300)) {
    EquilibriumParams p;
    p.beta = 0.0;
    p.nu = beta0_nu;
    p.branch = Branch::POSITIVE_T;
    p.iterations = 0;
    p.residual_norm = relative_residuals(p.beta, p.nu);
    return p;
  }

  const bool negative_branch = energia > uniform_mean_energy;

  // Expand geometrically from beta = 0 in the sign dictated by the energy
  // comparison until the energy equation changes sign.
  const double beta_unit = 1.0 / spec.max_value();
  double lo_beta = 0.0; // side with E(beta) - energia of known sign
  double hi_beta = 0.0;
  double last_energy = uniform_mean_energy;
  bool bracketed = false;
  double step = beta_unit;
  for (int k = 0; k < 200; ++k) {
    const double candidate = negative_branch ? -step : step;
    const double nu_c = solve_nu_given_beta(spec, n, candidate, opts);
    last_energy = detail::total_energy(spec, candidate, nu_c);
    const bool crossed = negative_branch ? (last_energy >= energia) : (last_energy <= energia);
    if (crossed) {
      hi_beta = candidate;
      bracketed = true;
      break;
    }
    lo_beta = candidate;
    step *= 2.0;
  }
  if (!bracketed)
    throw SolverError(
        "solve_equilibrium: outer bracket expansion failed (monotone structure violated?) "
        "last E(beta) = " + std::to_string(last_energy) + ", target = " + std::to_string(energia));

  // Bisection on beta. At each trial the inner solve re-establishes the
  // normalization, so the energy residual is the only driver.
  EquilibriumParams p;
  double beta = 0.5 * (lo_beta + hi_beta);
  double nu = 0.0;
  int iterations = 0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    ++iterations;
    beta = 0.5 * (lo_beta + hi_beta);
    nu = solve_nu_given_beta(spec, n, beta, opts);
    const double e = detail::total_energy(spec, beta, nu);
    if (std::abs(e - energia) <= opts.outer_tol_rel * std::max(std::abs(energia), 1e-300))
      break;
    const bool below = negative_branch ? (e < energia) : (e > energia);
    if (below)
      lo_beta = beta; // still on the starting side
    else
      hi_beta = beta;
    if (std::abs(hi_beta - lo_beta) <=
        4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(beta)))
      break;
  }

  p.beta = beta;
  p.nu = nu;
  p.branch = beta < 0.0 ? Branch::NEGATIVE_T : Branch::POSITIVE_T;
  p.iterations = iterations;
  p.residual_norm = relative_residuals(beta, nu);
  if (p.residual_norm > opts.outer_tol_rel)
    throw SolverError("solve_equilibrium: residual " + std::to_string(p.residual_norm) +
                      " above tolerance after " + std::to_string(iterations) +
                      " iterations (bracket [" + std::to_string(lo_beta) + ", " +
                      std::to_string(hi_beta) + "])");
  return p;
}

/// Evaluate the cumulative curve phi[l] for a solved parameter pair. Throws
/// DomainError naming the first bin whose occupation would be undefined.
inline OccupationCurve cumulative_curve(const CardinalitySpectrum& spec,
                                        const EquilibriumParams& params) {
  const std::int64_t s = spec.size();
  OccupationCurve curve;
  curve.phi.resize(static_cast<std::size_t>(s));
  detail::CompensatedAccumulator acc;
  for (std::int64_t l = 0; l < s; ++l) {
    const double omega = spec.value(l);
    const double x = params.beta * omega - params.nu;
    if (!(x > 0.0))
      throw DomainError("cumulative_curve: occupation undefined at bin " + std::to_string(l) +
                        " (beta*omega - nu = " + std::to_string(x) + ")");
    acc.add(1.0 / std::expm1(x));
    curve.phi[static_cast<std::size_t>(l)] = acc.value();
  }
  return curve;
}

} // namespace semiorank
