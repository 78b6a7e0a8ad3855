#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "semiorank/core.hpp"
#include "semiorank/equilibrium.hpp"
#include "semiorank/errors.hpp"
#include "semiorank/rng.hpp"

namespace semiorank {

/// One item of empirical data: cardinality (price) and its rank in the
/// non-decreasing ordering, 1-based. Ties keep input order.
struct RankedItem {
  double omega;
  std::int64_t rank;
};

/// Rank structure of an empirical dataset. For the cutoff at item l,
/// r_le(l) counts items with cardinality <= omega_l and r_minus[l] counts
/// those strictly above, so r_le(l) + r_minus[l] is always the total.
struct RankedData {
  std::vector<RankedItem> items; // sorted by omega, stable
  std::vector<std::int64_t> r_minus;

  std::int64_t total() const { return static_cast<std::int64_t>(items.size()); }
  std::int64_t r_le(std::int64_t l) const {
    return total() - r_minus[static_cast<std::size_t>(l)];
  }
};

inline RankedData build_ranks(const std::vector<double>& values) {
  if (values.empty()) throw DataError("build_ranks: empty input");
  for (double v : values)
    if (!std::isfinite(v) || v <= 0.0)
      throw DataError("build_ranks: cardinalities must be positive and finite");

  RankedData data;
  data.items.reserve(values.size());
  for (double v : values) data.items.push_back({v, 0});
  std::stable_sort(data.items.begin(), data.items.end(),
                   [](const RankedItem& a, const RankedItem& b) { return a.omega < b.omega; });
  for (std::size_t i = 0; i < data.items.size(); ++i)
    data.items[i].rank = static_cast<std::int64_t>(i) + 1;

  // r_minus[l] = #items with omega strictly greater; constant across a tie block.
  const std::int64_t n = data.total();
  data.r_minus.resize(values.size());
  std::size_t block_end = data.items.size();
  for (std::size_t i = data.items.size(); i-- > 0;) {
    if (i + 1 < data.items.size() && data.items[i].omega != data.items[i + 1].omega)
      block_end = i + 1;
    data.r_minus[i] = n - static_cast<std::int64_t>(block_end);
  }
  return data;
}

enum class FigureMode { cumulative, rank };

inline const char* to_string(FigureMode m) {
  return m == FigureMode::cumulative ? "cumulative" : "rank";
}

/// Fitted closed-form rank curve r(omega) = c1/(1 + alpha*omega^gamma) + c2.
/// (c1, c2) are in count units and alpha in original cardinality units, so
/// rank_curve() evaluates directly on raw prices; sigma is the RMS residual
/// on the normalized curve. inflection_omega = alpha^(-1/gamma), the
/// cardinality where the additional-expense factor of the user-cardinality
/// transform is minimal.
struct RankFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double alpha = 1.0;
  double gamma = 1.0;
  double sigma = 0.0;
  double inflection_omega = 1.0;
  bool converged = false;
  double omega_scale = 1.0;
  double count_scale = 1.0;
  FigureMode mode = FigureMode::cumulative;
};

inline double rank_curve(double omega, const RankFit& fit) {
  if (!(omega > 0.0)) throw DomainError("rank_curve: omega must be > 0");
  return fit.c1 / (1.0 + fit.alpha * std::pow(omega, fit.gamma)) + fit.c2;
}

enum class RatioForm {
  printed,        // omega = ((1/alpha) * r_l / r_{-l})^(1/gamma)
  self_consistent // omega = ((1/alpha) * r_{-l} / r_l)^(1/gamma)
};

/// Invert the rank ratio back to a cardinality. The printed form follows the
/// source formula verbatim; the self-consistent form is the exact inverse of
/// rank_curve at c2 = 0, c1 = total (the two differ by r_l <-> r_{-l} and are
/// equal at the symmetric point r_l = r_{-l}).
inline double invert_rank_ratio(std::int64_t r_l, std::int64_t r_minus_l, double alpha,
                                double gamma, RatioForm form = RatioForm::printed) {
  if (r_l <= 0 || r_minus_l <= 0)
    throw DomainError("invert_rank_ratio: both rank counts must be positive");
  if (!(alpha > 0.0) || !(gamma > 0.0))
    throw DomainError("invert_rank_ratio: alpha and gamma must be > 0");
  const double ratio = form == RatioForm::printed
                           ? static_cast<double>(r_l) / static_cast<double>(r_minus_l)
                           : static_cast<double>(r_minus_l) / static_cast<double>(r_l);
  return std::pow(ratio / alpha, 1.0 / gamma);
}

namespace detail {

/// 2-D Nelder-Mead minimization. on_improve, when set, sees the running best
/// objective after every iteration (it is non-increasing by construction).
struct NelderMeadResult {
  std::array<double, 2> x;
  double f = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

template <typename F>
NelderMeadResult nelder_mead_2d(F&& objective, std::array<double, 2> start, double scale,
                                int max_iterations = 500, double f_tol = 1e-13,
                                double x_tol = 1e-10,
                                const std::function<void(double)>& on_improve = {}) {
  struct Vertex {
    std::array<double, 2> x;
    double f;
  };
  std::array<Vertex, 3> simplex;
  simplex[0] = {start, objective(start)};
  for (int d = 0; d < 2; ++d) {
    auto x = start;
    x[static_cast<std::size_t>(d)] += scale;
    simplex[static_cast<std::size_t>(d) + 1] = {x, objective(x)};
  }

  NelderMeadResult result;
  for (int it = 0; it < max_iterations; ++it) {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    result.iterations = it;
    if (on_improve) on_improve(simplex[0].f);

    const double f_spread = std::abs(simplex[2].f - simplex[0].f);
    const double x_spread = std::max(std::abs(simplex[2].x[0] - simplex[0].x[0]),
                                     std::abs(simplex[2].x[1] - simplex[0].x[1]));
    if (f_spread <= f_tol && x_spread <= x_tol) {
      result.converged = true;
      break;
    }

    const std::array<double, 2> centroid = {(simplex[0].x[0] + simplex[1].x[0]) / 2.0,
                                            (simplex[0].x[1] + simplex[1].x[1]) / 2.0};
    auto blend = [&](double t) {
      return std::array<double, 2>{centroid[0] + t * (simplex[2].x[0] - centroid[0]),
                                   centroid[1] + t * (simplex[2].x[1] - centroid[1])};
    };

    const auto xr = blend(-1.0);
    const double fr = objective(xr);
    if (fr < simplex[0].f) {
      const auto xe = blend(-2.0);
      const double fe = objective(xe);
      simplex[2] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr < simplex[1].f) {
      simplex[2] = {xr, fr};
    } else {
      const auto xc = blend(fr < simplex[2].f ? -0.5 : 0.5);
      const double fc = objective(xc);
      if (fc < std::min(fr, simplex[2].f)) {
        simplex[2] = {xc, fc};
      } else {
        for (int v = 1; v < 3; ++v) {
          auto& vert = simplex[static_cast<std::size_t>(v)];
          vert.x = {0.5 * (vert.x[0] + simplex[0].x[0]), 0.5 * (vert.x[1] + simplex[0].x[1])};
          vert.f = objective(vert.x);
        }
      }
    }
  }
  std::sort(simplex.begin(), simplex.end(),
            [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  if (on_improve) on_improve(simplex[0].f);
  result.x = simplex[0].x;
  result.f = simplex[0].f;
  return result;
}

/// Given (alpha, gamma) on the working axes, profile out (c1, c2) by linear
/// least squares on y = c1*u + c2 with u = 1/(1 + alpha*x^gamma); returns the
/// RMS residual. Degenerate normal equations (all u equal) score +inf.
inline double profiled_rms(const std::vector<double>& xs, const std::vector<double>& ys,
                           double alpha, double gamma, double* c1_out = nullptr,
                           double* c2_out = nullptr) {
  const std::size_t m = xs.size();
  double su = 0, suu = 0, sy = 0, suy = 0;
  std::vector<double> u(m);
  for (std::size_t i = 0; i < m; ++i) {
    u[i] = 1.0 / (1.0 + alpha * std::pow(xs[i], gamma));
    su += u[i];
    suu += u[i] * u[i];
    sy += ys[i];
    suy += u[i] * ys[i];
  }
  const double md = static_cast<double>(m);
  const double det = md * suu - su * su;
  if (!(std::abs(det) > 1e-14 * md * std::max(1.0, suu)))
    return std::numeric_limits<double>::infinity();
  const double c1 = (md * suy - su * sy) / det;
  const double c2 = (sy - c1 * su) / md;
  double sse = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = c1 * u[i] + c2 - ys[i];
    sse += r * r;
  }
  if (c1_out) *c1_out = c1;
  if (c2_out) *c2_out = c2;
  return std::sqrt(sse / md);
}

} // namespace detail

struct FitOptions {
  FigureMode mode = FigureMode::cumulative;
  bool normalize = true;
  int max_iterations = 500;
  std::function<void(double)> on_improve; // test hook: running best objective
};

/// Fit the closed-form rank curve to empirical rank data by multi-start
/// Nelder-Mead over (log alpha, log gamma) with (c1, c2) profiled out per
/// evaluation. Both axes are normalized to [0, 1] before fitting (unless
/// disabled); reported parameters are mapped back to original units.
inline RankFit fit_rank_curve(const RankedData& data, const FitOptions& opts = {}) {
  const std::int64_t n = data.total();

  // Assemble the empirical curve. cumulative: one point per distinct omega,
  // y = count <= omega. rank: one point per item, y = its rank index.
  std::vector<double> xs, ys;
  if (opts.mode == FigureMode::cumulative) {
    for (std::int64_t l = 0; l < n; ++l) {
      const bool block_last = l + 1 >= n || data.items[static_cast<std::size_t>(l)].omega !=
                                                data.items[static_cast<std::size_t>(l + 1)].omega;
      if (!block_last) continue;
      xs.push_back(data.items[static_cast<std::size_t>(l)].omega);
      ys.push_back(static_cast<double>(data.r_le(l)));
    }
  } else {
    for (const auto& item : data.items) {
      xs.push_back(item.omega);
      ys.push_back(static_cast<double>(item.rank));
    }
  }

  std::size_t distinct = xs.size();
  if (opts.mode == FigureMode::rank) {
    distinct = 1;
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (xs[i] != xs[i - 1]) ++distinct;
  }
  if (distinct < 8)
    throw DataError("fit_rank_curve: need at least 8 distinct cardinalities, got " +
                    std::to_string(distinct));

  const double omega_scale = opts.normalize ? data.items.back().omega : 1.0;
  const double count_scale = opts.normalize ? static_cast<double>(n) : 1.0;
  for (auto& x : xs) x /= omega_scale;
  for (auto& y : ys) y /= count_scale;

  // Multi-start grid; each start is an independent simplex run and the best
  // (by RMS, first-in-grid tie-break) wins. Starts run concurrently unless a
  // trace hook is installed, whose per-run monotone stream must not interleave.
  const std::array<double, 3> alpha_grid = {0.1, 1.0, 10.0};
  const std::array<double, 3> gamma_grid = {0.5, 1.0, 2.0};
  auto run_start = [&](double a0, double g0) {
    auto objective = [&](const std::array<double, 2>& p) {
      return detail::profiled_rms(xs, ys, std::exp(p[0]), std::exp(p[1]));
    };
    return detail::nelder_mead_2d(objective, {std::log(a0), std::log(g0)}, 0.5,
                                  opts.max_iterations, 1e-13, 1e-10, opts.on_improve);
  };

  std::vector<detail::NelderMeadResult> runs;
  if (opts.on_improve) {
    for (double a0 : alpha_grid)
      for (double g0 : gamma_grid) runs.push_back(run_start(a0, g0));
  } else {
    std::vector<std::future<detail::NelderMeadResult>> futures;
    for (double a0 : alpha_grid)
      for (double g0 : gamma_grid)
        futures.push_back(std::async(std::launch::async, [&run_start, a0, g0] {
          return run_start(a0, g0);
        }));
    for (auto& fut : futures) runs.push_back(fut.get());
  }

  detail::NelderMeadResult best;
  for (const auto& run : runs)
    if (run.f < best.f) best = run;
  if (!(best.f < std::numeric_limits<double>::infinity()))
    throw DataError("fit_rank_curve: degenerate data, objective undefined everywhere");

  const double alpha_fit = std::exp(best.x[0]);
  const double gamma_fit = std::exp(best.x[1]);
  double c1_fit = 0, c2_fit = 0;
  const double sigma = detail::profiled_rms(xs, ys, alpha_fit, gamma_fit, &c1_fit, &c2_fit);

  RankFit fit;
  fit.gamma = gamma_fit;
  fit.alpha = alpha_fit / std::pow(omega_scale, gamma_fit);
  fit.c1 = c1_fit * count_scale;
  fit.c2 = c2_fit * count_scale;
  fit.sigma = sigma;
  fit.inflection_omega = std::pow(fit.alpha, -1.0 / fit.gamma);
  fit.converged = best.converged;
  fit.omega_scale = omega_scale;
  fit.count_scale = count_scale;
  fit.mode = opts.mode;
  return fit;
}

/// The occupation curve reinterpreted as theoretical rank vs cardinality:
/// pairs (omega_l, phi_l), the thin line drawn against empirical rank data.
inline std::vector<std::pair<double, double>> theoretical_rank_from_equilibrium(
    const CardinalitySpectrum& spec, const EquilibriumParams& params) {
  const OccupationCurve curve = cumulative_curve(spec, params);
  std::vector<std::pair<double, double>> out;
  out.reserve(curve.phi.size());
  for (std::size_t l = 0; l < curve.phi.size(); ++l)
    out.emplace_back(spec.values()[l], curve.phi[l]);
  return out;
}

/// Parameters of the synthetic catalog generator. (c1, c2, alpha, gamma)
/// describe the normalized cumulative curve y(x) = c1/(1+alpha*x^gamma)+c2 on
/// the unit square; for a valid ascending cumulative this requires c1 < 0,
/// c2 > 1 and c1 + c2 < 1/n, which the generator enforces. noise is the
/// multiplicative price jitter (0 = exact curve); price_scale maps unit
/// prices to catalog units.
struct SynthParams {
  double c1 = -1.02;
  double c2 = 1.03;
  double alpha = 11.0;
  double gamma = 2.0;
  std::int64_t count = 2000;
  double noise = 0.0;
  double price_scale = 1.0;
  std::uint64_t seed = 0;
};

/// Generate prices whose normalized cumulative curve lies exactly on the
/// model: the l-th smallest price solves c1/(1+alpha*x^gamma)+c2 = l/n.
inline std::vector<double> synth_prices(const SynthParams& p) {
  if (p.count < 1) throw DataError("synth_prices: count must be >= 1");
  if (!(p.alpha > 0.0) || !(p.gamma > 0.0))
    throw DataError("synth_prices: alpha and gamma must be > 0");
  const double nd = static_cast<double>(p.count);
  if (!(p.c1 < 0.0) || !(p.c2 > 1.0) || !(p.c1 + p.c2 < 1.0 / nd))
    throw DataError("synth_prices: (c1, c2) must describe an increasing normalized "
                    "cumulative curve spanning (0, 1]: c1 < 0, c2 > 1, c1 + c2 < 1/n");

  std::vector<double> prices(static_cast<std::size_t>(p.count));
  for (std::int64_t l = 1; l <= p.count; ++l) {
    const double y = static_cast<double>(l) / nd;
    const double x = std::pow((p.c1 / (y - p.c2) - 1.0) / p.alpha, 1.0 / p.gamma);
    prices[static_cast<std::size_t>(l - 1)] = x * p.price_scale;
  }
  if (p.noise > 0.0) {
    Rng rng(split_seed(p.seed, 0x73796e74ULL));
    for (auto& x : prices) {
      double factor = 1.0 + p.noise * rng.gauss();
      while (factor <= 0.0) factor = 1.0 + p.noise * rng.gauss();
      x *= factor;
    }
  }
  return prices;
}

} // namespace semiorank
