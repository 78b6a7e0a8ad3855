#pragma once

// Independent test oracles. These deliberately reimplement enumeration and
// summation with different algorithms than the library (odometer iteration
// instead of recursion, long double naive sums instead of compensated ones)
// so agreement is evidence, not tautology.

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

/// All weak compositions of n into s parts, odometer order starting at
/// (n, 0, ..., 0).
inline std::vector<std::vector<std::int64_t>> enumerate_compositions(std::int64_t n,
                                                                     std::int64_t s) {
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> c(static_cast<std::size_t>(s), 0);
  c[0] = n;
  for (;;) {
    out.push_back(c);
    if (c.back() == n) break;
    std::size_t i = c.size() - 2;
    while (c[i] == 0) --i;
    --c[i];
    const std::int64_t t = c.back() + 1;
    c.back() = 0;
    c[i + 1] = t;
  }
  return out;
}

inline double energia(const std::vector<std::int64_t>& counts,
                      const std::vector<double>& omegas) {
  long double e = 0.0L;
  for (std::size_t i = 0; i < counts.size(); ++i)
    e += static_cast<long double>(counts[i]) * static_cast<long double>(omegas[i]);
  return static_cast<double>(e);
}

inline double log_sum_exp(const std::vector<double>& logs) {
  double hi = logs.front();
  for (double v : logs) hi = std::max(hi, v);
  long double acc = 0.0L;
  for (double v : logs) acc += std::exp(static_cast<long double>(v - hi));
  return hi + static_cast<double>(std::log(acc));
}

/// Brute-force log Z(beta, N) over the full composition list.
inline double log_partition(const std::vector<double>& omegas, std::int64_t n, double beta) {
  const auto comps = enumerate_compositions(n, static_cast<std::int64_t>(omegas.size()));
  std::vector<double> logs;
  logs.reserve(comps.size());
  for (const auto& c : comps) logs.push_back(-beta * energia(c, omegas));
  return log_sum_exp(logs);
}

} // namespace oracle
