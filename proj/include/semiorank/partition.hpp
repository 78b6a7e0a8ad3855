#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "semiorank/core.hpp"
#include "semiorank/equilibrium.hpp"
#include "semiorank/errors.hpp"
#include "semiorank/sampler.hpp"

namespace semiorank {

namespace detail {

inline double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

} // namespace detail

/// log Z(beta, N) with Z = sum over compositions {N_i} of exp(-beta * energia).
/// Coefficient extraction from the product of per-bin geometric series: one
/// rolling row of N+1 log-domain cells, bins outer, counts inner, using
///   Z_i(n) = Z_{i-1}(n) + e^{-beta*omega_i} * Z_i(n-1).
inline double partition_exact(const CardinalitySpectrum& spec, std::int64_t n, double beta,
                              double cap_cells = 1e8) {
  if (n < 1) throw DomainError("partition_exact: N must be >= 1");
  const std::int64_t s = spec.size();
  const double cells = static_cast<double>(s) * (static_cast<double>(n) + 1.0);
  if (!(cells <= cap_cells))
    throw CapExceededError("partition_exact: s*(N+1) = " + std::to_string(cells) +
                               " DP cells exceed cap " + std::to_string(cap_cells),
                           cells);

  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> row(static_cast<std::size_t>(n) + 1, neg_inf);
  row[0] = 0.0;
  for (std::int64_t i = 0; i < s; ++i) {
    const double w = -beta * spec.value(i);
    for (std::int64_t m = 1; m <= n; ++m) {
      auto& cell = row[static_cast<std::size_t>(m)];
      cell = detail::logaddexp(cell, row[static_cast<std::size_t>(m - 1)] + w);
    }
  }
  return row[static_cast<std::size_t>(n)];
}

/// Saddle-point evaluation of log Z plus the exact DP value when affordable.
struct PartitionResult {
  double exact_log = std::numeric_limits<double>::quiet_NaN();
  double saddle_log = std::numeric_limits<double>::quiet_NaN();
  double nu_star = 0.0;
  double rel_gap = std::numeric_limits<double>::quiet_NaN();
  bool exact_available = false;
  bool scaling_assumptions_ok = true; // s/N within [1/8, 8]
};

/// Stationary-phase asymptotics of the coefficient integral:
///   log Z ~ -nu*N + log zeta_s(beta, nu*) - 0.5*log(2*pi*N*sigma_eff^2)
/// with nu* from the stationarity condition N = sum 1/(exp(beta*omega_i - nu) - 1)
/// and N*sigma_eff^2 = d^2 log zeta_s / d nu^2. The Gaussian normalization is
/// the standard completion of the stationary-phase constant; the measured gap
/// against the exact DP quantifies it.
inline PartitionResult partition_saddle(const CardinalitySpectrum& spec, std::int64_t n,
                                        double beta, double cap_cells = 1e8) {
  if (n < 1) throw DomainError("partition_saddle: N must be >= 1");
  PartitionResult result;
  const std::int64_t s = spec.size();
  const double ratio = static_cast<double>(s) / static_cast<double>(n);
  result.scaling_assumptions_ok = ratio >= 0.125 && ratio <= 8.0;

  const double nu = solve_nu_given_beta(spec, n, beta);
  result.nu_star = nu;

  double log_zeta = 0.0, curvature = 0.0;
  {
    detail::CompensatedAccumulator lz, d2;
    for (std::int64_t i = 0; i < s; ++i) {
      const double x = beta * spec.value(i) - nu; // > 0 on the solved domain
      lz.add(-std::log1p(-std::exp(-x)));
      const double occ = 1.0 / std::expm1(x);
      d2.add(occ * (1.0 + occ));
    }
    log_zeta = lz.value();
    curvature = d2.value();
  }
  result.saddle_log = -nu * static_cast<double>(n) + log_zeta -
                      0.5 * std::log(2.0 * 3.14159265358979323846 * curvature);

  const double cells = static_cast<double>(s) * (static_cast<double>(n) + 1.0);
  if (cells <= cap_cells) {
    result.exact_log = partition_exact(spec, n, beta, cap_cells);
    result.exact_available = true;
    result.rel_gap = std::abs(result.exact_log - result.saddle_log) /
                     std::max(std::abs(result.exact_log), 1e-300);
  }
  return result;
}

/// Lemma-2 style tail mass: the Boltzmann-weighted share of compositions whose
/// energia exceeds energia + N^(1/2+eps), relative to the size of the
/// AT_LEAST feasible set. Enumeration-based, small instances only.
inline double tail_mass_ratio(const CardinalitySpectrum& spec, std::int64_t n, double beta,
                              double energia, double eps, double cap = 1e7) {
  const EnergiaConstraint vacuous(0.0, Direction::AT_LEAST);
  const auto all = enumerate_feasible(spec, n, vacuous, cap);
  const double threshold = energia + std::pow(static_cast<double>(n), 0.5 + eps);

  std::int64_t feasible_count = 0;
  detail::CompensatedAccumulator tail;
  for (const auto& comp : all) {
    const double e = energia_of(comp, spec);
    if (e >= energia) ++feasible_count;
    if (e > threshold) tail.add(std::exp(-beta * e));
  }
  if (feasible_count == 0)
    throw DataError("tail_mass_ratio: empty feasible set (energia > omega_max*N?)");
  return tail.value() / static_cast<double>(feasible_count);
}

} // namespace semiorank
