#pragma once

// Chi-square survival function for the uniformity tests, via the regularized
// incomplete gamma function (series below a+1, Lentz continued fraction above).

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace teststats {

inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Q(a, x) = upper regularized incomplete gamma.
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (x == 0.0) return 1.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_contfrac(a, x);
}

/// P(Chi2_dof >= stat).
inline double chi_square_sf(double stat, double dof) {
  return gamma_q(0.5 * dof, 0.5 * stat);
}

/// Pearson statistic against equal expected counts.
inline double chi_square_uniform_stat(const std::vector<std::int64_t>& observed,
                                      std::int64_t total) {
  const double expected = static_cast<double>(total) / static_cast<double>(observed.size());
  double stat = 0.0;
  for (std::int64_t o : observed) {
    const double d = static_cast<double>(o) - expected;
    stat += d * d / expected;
  }
  return stat;
}

} // namespace teststats
