#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "semiorank/core.hpp"
#include "semiorank/equilibrium.hpp"
#include "semiorank/errors.hpp"
#include "semiorank/rng.hpp"

namespace semiorank {

/// Empirical summary of a sampled ensemble against a theoretical curve.
struct EnsembleStats {
  std::int64_t sample_count = 0;
  std::vector<double> mean_cumulative;          // mean B_l over samples
  std::map<double, double> deviation_quantiles; // quantile level -> D
  double epsilon = 0.05;                        // head restriction l >= eps*s
};

/// Metropolis chain controls. A sweep is N proposed moves.
struct ChainConfig {
  std::int64_t burn_in = 50;  // sweeps before the first sample
  std::int64_t thinning = 5;  // sweeps between samples
  std::uint64_t seed = 0;
  int chains = 4; // independent chains; k is split across them deterministically

  void validate() const {
    if (burn_in < 0) throw DataError("burn_in must be >= 0");
    if (thinning < 1) throw DataError("thinning must be >= 1");
    if (chains < 1) throw DataError("chains must be >= 1");
  }
};

inline double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

/// Number of compositions of N into s non-negative parts, C(N+s-1, s-1),
/// as a double (inf when it overflows).
inline double composition_count(std::int64_t n, std::int64_t s) {
  return std::exp(log_binomial(n + s - 1, s - 1));
}

/// Exhaustively list every composition satisfying the constraint, in
/// lexicographic order of the counts vector. Refuses when the unconstrained
/// count C(N+s-1, s-1) exceeds the cap.
inline std::vector<Composition> enumerate_feasible(const CardinalitySpectrum& spec,
                                                   std::int64_t n,
                                                   const EnergiaConstraint& c,
                                                   double cap = 1e7) {
  const std::int64_t s = spec.size();
  const double size_estimate = composition_count(n, s);
  if (!(size_estimate <= cap))
    throw CapExceededError("enumerate_feasible: C(N+s-1, s-1) ~ " +
                               std::to_string(size_estimate) + " exceeds cap " +
                               std::to_string(cap),
                           size_estimate);

  std::vector<Composition> out;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(s), 0);
  // Lexicographic: counts[0] is the slowest-varying digit, ascending.
  std::function<void(std::int64_t, std::int64_t, double)> rec =
      [&](std::int64_t bin, std::int64_t remaining, double energia) {
        if (bin == s - 1) {
          counts[static_cast<std::size_t>(bin)] = remaining;
          const double total = energia + static_cast<double>(remaining) * spec.value(bin);
          if (c.satisfied_by(total)) out.emplace_back(counts);
          counts[static_cast<std::size_t>(bin)] = 0;
          return;
        }
        for (std::int64_t k = 0; k <= remaining; ++k) {
          counts[static_cast<std::size_t>(bin)] = k;
          rec(bin + 1, remaining - k, energia + static_cast<double>(k) * spec.value(bin));
        }
        counts[static_cast<std::size_t>(bin)] = 0;
      };
  rec(0, n, 0.0);
  return out;
}

/// Exact conditional mean of the cumulative counts B_l over the equiprobable
/// feasible set.
inline std::vector<double> mean_cumulative_exact(const CardinalitySpectrum& spec,
                                                 std::int64_t n,
                                                 const EnergiaConstraint& c,
                                                 double cap = 1e7) {
  const auto feasible = enumerate_feasible(spec, n, c, cap);
  if (feasible.empty())
    throw DataError("mean_cumulative_exact: no feasible composition");
  const std::size_t s = static_cast<std::size_t>(spec.size());
  std::vector<std::int64_t> sums(s, 0);
  for (const auto& comp : feasible) {
    std::int64_t run = 0;
    for (std::size_t l = 0; l < s; ++l) {
      run += comp.counts()[l];
      sums[l] += run;
    }
  }
  std::vector<double> mean(s);
  for (std::size_t l = 0; l < s; ++l)
    mean[l] = static_cast<double>(sums[l]) / static_cast<double>(feasible.size());
  return mean;
}

namespace detail {

// One Metropolis chain over the feasible set. The proposal draws an ordered
// pair (i, j) uniformly from all s^2 pairs and moves one unit i -> j; the
// kernel is symmetric, so acceptance is pure feasibility and the uniform
// distribution on the feasible set is stationary. Rejected proposals (empty
// source bin or infeasible move) count as a step.
//
// Irreducibility: moving a unit into the top bin never decreases energia, so
// from any feasible state the AT_LEAST corner (everything in the max bin) is
// reachable through feasible states; reversing such paths connects any two
// states. The AT_MOST branch is the mirror argument through the bottom bin.
class CompositionChain {
public:
  CompositionChain(const CardinalitySpectrum& spec, std::int64_t n,
                   const EnergiaConstraint& c, std::uint64_t seed)
      : spec_(spec), constraint_(c), n_(n), rng_(seed),
        counts_(static_cast<std::size_t>(spec.size()), 0) {
    const std::size_t corner = constraint_.direction == Direction::AT_LEAST
                                   ? counts_.size() - 1
                                   : 0;
    counts_[corner] = n;
    energia_.add(static_cast<double>(n) * spec_.value(static_cast<std::int64_t>(corner)));
    if (!constraint_.satisfied_by(energia_.value()))
      throw DataError("sample_uniform: no feasible starting composition (corner violates constraint)");
  }

  void step() {
    const std::uint64_t s = static_cast<std::uint64_t>(counts_.size());
    const std::uint64_t i = rng_.below(s);
    const std::uint64_t j = rng_.below(s);
    if (counts_[i] == 0) return;
    const double d = spec_.values()[j] - spec_.values()[i];
    if (!constraint_.satisfied_by(energia_.value() + d)) return;
    --counts_[i];
    ++counts_[j];
    energia_.add(d);
  }

  void sweep() {
    for (std::int64_t m = 0; m < n_; ++m) step();
  }

  Composition emit() {
    // Re-anchor the incremental energia to a fresh compensated dot product so
    // float drift cannot accumulate across long runs.
    energia_ = CompensatedAccumulator{};
    energia_.add(compensated_sum(counts_.size(), [&](std::size_t b) {
      return static_cast<double>(counts_[b]) * spec_.values()[b];
    }));
    Composition comp(counts_);
    if (!satisfies(comp, spec_, constraint_))
      throw std::logic_error("sampler invariant violated: emitted composition infeasible");
    return comp;
  }

private:
  const CardinalitySpectrum& spec_;
  EnergiaConstraint constraint_;
  std::int64_t n_;
  Rng rng_;
  std::vector<std::int64_t> counts_;
  CompensatedAccumulator energia_;
};

inline std::vector<std::int64_t> chain_sample_split(std::int64_t k, int chains) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(chains), k / chains);
  for (std::int64_t c = 0; c < k % chains; ++c) out[static_cast<std::size_t>(c)] += 1;
  return out;
}

} // namespace detail

/// Draw k asymptotically uniform samples from the feasible set. Chains run
/// concurrently with seeds split from config.seed; the output order is
/// chain-major and independent of scheduling.
inline std::vector<Composition> sample_uniform(const CardinalitySpectrum& spec, std::int64_t n,
                                               const EnergiaConstraint& c,
                                               const ChainConfig& config, std::int64_t k) {
  config.validate();
  if (k < 1) throw DataError("sample_uniform: k must be >= 1");

  const auto split = detail::chain_sample_split(k, config.chains);
  std::vector<std::vector<Composition>> buckets(split.size());

  auto run_chain = [&](std::size_t chain_idx) {
    detail::CompositionChain chain(spec, n, c, split_seed(config.seed, chain_idx));
    auto& bucket = buckets[chain_idx];
    bucket.reserve(static_cast<std::size_t>(split[chain_idx]));
    for (std::int64_t sw = 0; sw < config.burn_in; ++sw) chain.sweep();
    for (std::int64_t m = 0; m < split[chain_idx]; ++m) {
      for (std::int64_t sw = 0; sw < config.thinning; ++sw) chain.sweep();
      bucket.push_back(chain.emit());
    }
  };

  if (config.chains == 1) {
    run_chain(0);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(split.size());
    for (std::size_t ci = 0; ci < split.size(); ++ci)
      workers.emplace_back([&, ci] {
        try {
          run_chain(ci);
        } catch (...) {
          errors[ci] = std::current_exception();
        }
      });
    for (auto& w : workers) w.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<Composition> samples;
  samples.reserve(static_cast<std::size_t>(k));
  for (auto& bucket : buckets)
    for (auto& comp : bucket) samples.push_back(std::move(comp));
  return samples;
}

/// Nearest-rank quantile of an unsorted copy of v.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw DataError("quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double pos = std::ceil(q * static_cast<double>(v.size())) - 1.0;
  const std::size_t idx = static_cast<std::size_t>(
      std::clamp(pos, 0.0, static_cast<double>(v.size() - 1)));
  return v[idx];
}

/// Head-restricted sup deviation D = max_{l >= eps*s} |B_l - phi_l|.
inline double sup_deviation(const Composition& comp, const OccupationCurve& curve,
                            double epsilon) {
  const std::int64_t s = comp.size();
  const std::int64_t l_min =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(epsilon * static_cast<double>(s))));
  double d = 0.0;
  std::int64_t run = 0;
  for (std::int64_t l = 1; l <= s; ++l) {
    run += comp.counts()[static_cast<std::size_t>(l - 1)];
    if (l < l_min) continue;
    d = std::max(d, std::abs(static_cast<double>(run) - curve.phi[static_cast<std::size_t>(l - 1)]));
  }
  return d;
}

inline EnsembleStats ensemble_stats(const std::vector<Composition>& samples,
                                    const OccupationCurve& curve, double epsilon,
                                    const std::vector<double>& quantile_levels = {0.5, 0.9, 0.99}) {
  if (samples.empty()) throw DataError("ensemble_stats: no samples");
  EnsembleStats stats;
  stats.sample_count = static_cast<std::int64_t>(samples.size());
  stats.epsilon = epsilon;
  const std::size_t s = static_cast<std::size_t>(samples.front().size());
  std::vector<std::int64_t> sums(s, 0);
  std::vector<double> devs;
  devs.reserve(samples.size());
  for (const auto& comp : samples) {
    std::int64_t run = 0;
    for (std::size_t l = 0; l < s; ++l) {
      run += comp.counts()[l];
      sums[l] += run;
    }
    devs.push_back(sup_deviation(comp, curve, epsilon));
  }
  stats.mean_cumulative.resize(s);
  for (std::size_t l = 0; l < s; ++l)
    stats.mean_cumulative[l] = static_cast<double>(sums[l]) / static_cast<double>(samples.size());
  for (double q : quantile_levels)
    stats.deviation_quantiles[q] = quantile(devs, q);
  return stats;
}

/// Spectrum generator for the scaling experiment: N -> spectrum with s ~ N.
using SpectrumFamily = std::function<CardinalitySpectrum(std::int64_t)>;

/// Bounded linearly graded family omega_i = B*i/s with s = round(s_ratio*N).
inline SpectrumFamily linear_grading_family(double s_ratio = 1.0, double bound = 1.0) {
  return [s_ratio, bound](std::int64_t n) {
    const std::int64_t s = std::max<std::int64_t>(1, static_cast<std::int64_t>(
                                                         std::llround(s_ratio * static_cast<double>(n))));
    std::vector<double> values(static_cast<std::size_t>(s));
    for (std::int64_t i = 1; i <= s; ++i)
      values[static_cast<std::size_t>(i - 1)] =
          bound * static_cast<double>(i) / static_cast<double>(s);
    return CardinalitySpectrum(values);
  };
}

struct ConcentrationPoint {
  std::int64_t n = 0;
  EnsembleStats stats;
  EquilibriumParams params;
  double phi_normalization_error = 0.0; // |phi_s - N|
  double exceed_threshold = 0.0;        // N^(3/4 + eps)
  double exceed_fraction = 0.0;         // P(D >= threshold)
};

struct ConcentrationResult {
  std::vector<ConcentrationPoint> points;
  std::map<double, double> slope_per_quantile; // log D_q vs log N
  double epsilon = 0.05;
  double energia_ratio = 1.0;
};

/// Empirical check of the concentration bound: for each N solve the
/// equilibrium at energia = ratio * N * mean(omega), sample k compositions,
/// record the head-restricted sup deviations, and fit the log-log slope of
/// each deviation quantile against N. The bound predicts slope <= 3/4 + eps.
inline ConcentrationResult concentration_experiment(
    const SpectrumFamily& family, const std::vector<std::int64_t>& n_grid,
    double energia_ratio, double epsilon, std::int64_t k, const ChainConfig& config,
    const std::vector<double>& quantile_levels = {0.5, 0.9, 0.99}) {
  if (n_grid.empty()) throw DataError("concentration_experiment: empty N grid");
  ConcentrationResult result;
  result.epsilon = epsilon;
  result.energia_ratio = energia_ratio;

  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const std::int64_t n = n_grid[gi];
    const CardinalitySpectrum spec = family(n);
    const double energia = energia_ratio * static_cast<double>(n) * spec.mean();
    const Direction dir = energia_ratio >= 1.0 ? Direction::AT_LEAST : Direction::AT_MOST;
    const EnergiaConstraint constraint(energia, dir);

    const EquilibriumParams params = solve_equilibrium(spec, n, constraint);
    const OccupationCurve curve = cumulative_curve(spec, params);

    ChainConfig point_config = config;
    point_config.seed = split_seed(config.seed, 0x636f6e63ULL + gi);
    const auto samples = sample_uniform(spec, n, constraint, point_config, k);

    ConcentrationPoint point;
    point.n = n;
    point.params = params;
    point.stats = ensemble_stats(samples, curve, epsilon, quantile_levels);
    point.phi_normalization_error = std::abs(curve.phi.back() - static_cast<double>(n));
    point.exceed_threshold = std::pow(static_cast<double>(n), 0.75 + epsilon);
    std::int64_t exceed = 0;
    for (const auto& comp : samples)
      if (sup_deviation(comp, curve, epsilon) >= point.exceed_threshold) ++exceed;
    point.exceed_fraction = static_cast<double>(exceed) / static_cast<double>(samples.size());
    result.points.push_back(std::move(point));
  }

  for (double q : quantile_levels) {
    // Least-squares line through (log N, log D_q); undefined if any D_q is 0.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    bool ok = true;
    const double m = static_cast<double>(result.points.size());
    for (const auto& p : result.points) {
      const double d = p.stats.deviation_quantiles.at(q);
      if (!(d > 0.0)) {
        ok = false;
        break;
      }
      const double x = std::log(static_cast<double>(p.n));
      const double y = std::log(d);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    result.slope_per_quantile[q] =
        ok && result.points.size() > 1
            ? (m * sxy - sx * sy) / (m * sxx - sx * sx)
            : std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

} // namespace semiorank
