#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "semiorank/errors.hpp"

namespace semiorank {

namespace detail {

/// Kahan-compensated sum of f(i) for i in [0, n).
template <typename F>
double compensated_sum(std::size_t n, F&& term) {
  double sum = 0.0, carry = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = term(i) - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

/// Running Kahan accumulator, for incremental updates that must not drift.
struct CompensatedAccumulator {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

} // namespace detail

/// Ordered list of user cardinalities: omega[0] <= omega[1] <= ... <= omega[s-1].
/// Ties keep input order (stable sort), so equal-cardinality bins have an
/// arbitrary but deterministic ordering. Immutable after construction.
class CardinalitySpectrum {
public:
  explicit CardinalitySpectrum(std::vector<double> values)
      : values_(std::move(values)) {
    if (values_.empty())
      throw DataError("cardinality spectrum must contain at least one value");
    for (double v : values_) {
      if (!std::isfinite(v) || v <= 0.0)
        throw DataError("cardinality values must be strictly positive and finite");
    }
    std::stable_sort(values_.begin(), values_.end());
    sum_ = detail::compensated_sum(values_.size(), [&](std::size_t i) { return values_[i]; });
    mean_ = sum_ / static_cast<double>(values_.size());
  }

  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }
  const std::vector<double>& values() const { return values_; }
  double value(std::int64_t i) const { return values_[static_cast<std::size_t>(i)]; }
  double min_value() const { return values_.front(); }
  double max_value() const { return values_.back(); }
  double sum() const { return sum_; }
  double mean() const { return mean_; }

private:
  std::vector<double> values_;
  double sum_ = 0.0;
  double mean_ = 0.0;
};

/// Occupancy vector {N_i} with sum N >= 1. Immutable after construction.
class Composition {
public:
  explicit Composition(std::vector<std::int64_t> counts)
      : counts_(std::move(counts)) {
    if (counts_.empty())
      throw DataError("composition must have at least one bin");
    total_ = 0;
    for (std::int64_t c : counts_) {
      if (c < 0) throw DataError("composition counts must be non-negative");
      total_ += c;
    }
    if (total_ < 1)
      throw DataError("composition total must be a positive integer");
  }

  std::int64_t size() const { return static_cast<std::int64_t>(counts_.size()); }
  std::int64_t total() const { return total_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t count(std::int64_t i) const { return counts_[static_cast<std::size_t>(i)]; }

  /// Cumulative counts B_l = sum_{i<=l} N_i; non-decreasing with B_{s-1} = N.
  std::vector<std::int64_t> cumulative() const {
    std::vector<std::int64_t> b(counts_.size());
    std::int64_t run = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      run += counts_[i];
      b[i] = run;
    }
    return b;
  }

private:
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

enum class Direction { AT_MOST, AT_LEAST };

inline const char* to_string(Direction d) {
  return d == Direction::AT_MOST ? "at_most" : "at_least";
}

/// Energy budget: total user cardinality must be <= or >= energia. The
/// admissibility window (which side of the uniform mean N*omega_bar the budget
/// sits on) is a solver precondition, not a membership predicate, so it is
/// checked by admissible_for() rather than the constructor; energia = 0 with
/// AT_LEAST is the vacuous constraint.
struct EnergiaConstraint {
  double energia;
  Direction direction;

  EnergiaConstraint(double energia, Direction direction)
      : energia(energia), direction(direction) {
    if (!std::isfinite(energia) || energia < 0.0)
      throw DataError("energia must be a non-negative finite real");
  }

  bool satisfied_by(double total_energia) const {
    return direction == Direction::AT_LEAST ? total_energia >= energia
                                            : total_energia <= energia;
  }

  /// True iff (spectrum, N, energia) sits in the branch window where the
  /// equiprobable-composition model applies:
  ///   AT_LEAST: (N/s)*sum(omega) <= energia <= omega_max*N
  ///   AT_MOST:  energia < N*sum(omega)/s
  bool admissible_for(const CardinalitySpectrum& spec, std::int64_t n) const {
    const double uniform_mean_energy = static_cast<double>(n) * spec.mean();
    if (direction == Direction::AT_LEAST)
      return energia >= uniform_mean_energy &&
             energia <= spec.max_value() * static_cast<double>(n);
    return energia < uniform_mean_energy;
  }
};

/// Total user energia sum_i N_i * omega_i (compensated summation).
inline double energia_of(const Composition& comp, const CardinalitySpectrum& spec) {
  if (comp.size() != spec.size())
    throw DimensionError("composition has " + std::to_string(comp.size()) +
                         " bins, spectrum has " + std::to_string(spec.size()));
  return detail::compensated_sum(
      static_cast<std::size_t>(comp.size()),
      [&](std::size_t i) { return static_cast<double>(comp.counts()[i]) * spec.values()[i]; });
}

inline bool satisfies(const Composition& comp, const CardinalitySpectrum& spec,
                      const EnergiaConstraint& c) {
  return c.satisfied_by(energia_of(comp, spec));
}

/// User cardinality omega*(1 + alpha*omega^gamma + alpha^-1*omega^-gamma).
/// The excess factor is >= 2 with equality only at omega = alpha^(-1/gamma),
/// and blows up as omega -> 0+, so the transform is not monotone in omega.
inline double user_cardinality_transform(double omega, double alpha, double gamma) {
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw DomainError("user_cardinality_transform: omega must be > 0");
  if (!(alpha > 0.0) || !(gamma > 0.0))
    throw DomainError("user_cardinality_transform: alpha and gamma must be > 0");
  const double up = alpha * std::pow(omega, gamma);
  const double down = std::pow(omega, -gamma) / alpha;
  return omega * (1.0 + up + down);
}

} // namespace semiorank
