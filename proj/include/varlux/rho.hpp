#pragma once
// Critical radius functions: constant fitting for the two-sided growth
// estimate, sub-criticality tests, and the radius induced by a potential.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "varlux/errors.hpp"
#include "varlux/grid.hpp"

namespace varlux {

struct RhoFunction {
  GridFunction values;  // strictly positive
};

inline RhoFunction make_rho(GridFunction samples) {
  for (Index i = 0; i < static_cast<Index>(samples.values.size()); ++i) {
    const double v = samples.values[i];
    if (!(v > 0.0) || !std::isfinite(v))
      throw invalid_input("make_rho: non-positive value at cell " + std::to_string(i));
  }
  if (samples.values.empty()) throw invalid_input("make_rho: empty sample vector");
  samples.nonneg = true;
  return RhoFunction{std::move(samples)};
}

inline RhoFunction constant_rho(const Domain& d, double r0) {
  return make_rho(constant_grid_function(d, r0));
}

struct RhoConstants {
  double c_rho = 1.0;
  double n0 = 1.0;
  std::array<Index, 2> worst_pair{0, 0};  // ordered (x, y) attaining the fit
};

inline constexpr double kDefaultN0Grid[] = {1.0, 1.5, 2.0, 3.0, 4.0};

// Fits the smallest c such that, for every sampled ordered cell pair (x, y),
//   c^{-1} rho(x) (1 + |x-y|/rho(x))^{-N0} <= rho(y)
//                <= c rho(x) (1 + |x-y|/rho(x))^{N0/(N0+1)},
// then returns the (N0, c) pair from the grid minimizing c (first minimizer
// on ties).  All ordered pairs are used when cells^2 <= pair_budget.
inline RhoConstants verify_critical(const RhoFunction& rho,
                                    std::span<const double> n0_grid = kDefaultN0Grid,
                                    Index pair_budget = 4000000,
                                    std::uint64_t seed = 20240901) {
  if (n0_grid.empty()) throw invalid_input("verify_critical: empty N0 grid");
  for (double g : n0_grid)
    if (!(g >= 1.0)) throw invalid_input("verify_critical: N0 values must be >= 1");
  const Domain& d = rho.values.domain;
  const Index n = d.cell_count();
  const std::size_t kn = n0_grid.size();
  std::vector<double> best(kn, 1.0);
  std::vector<std::array<Index, 2>> arg(kn, {0, 0});

  auto visit_pair = [&](Index a, Index b) {
    const Point pa = d.cell_center(a), pb = d.cell_center(b);
    double s = 0.0;
    for (int k = 0; k < d.dim; ++k) {
      const double t = pa[k] - pb[k];
      s = s + t * t;
    }
    const double dist = std::sqrt(s);
    const double ra = rho.values.values[a], rb = rho.values.values[b];
    const double lr = std::log(ra / rb);
    const double lb = std::log1p(dist / ra);
    for (std::size_t k = 0; k < kn; ++k) {
      const double n0 = n0_grid[k];
      const double lower = std::exp(lr - n0 * lb);
      const double upper = std::exp(-lr - (n0 / (n0 + 1.0)) * lb);
      const double need = std::max(lower, upper);
      if (need > best[k]) {
        best[k] = need;
        arg[k] = {a, b};
      }
    }
  };

  if (n * n <= pair_budget) {
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b)
        if (a != b) visit_pair(a, b);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    for (Index s = 0; s < pair_budget; ++s) {
      const Index a = pick(rng), b = pick(rng);
      if (a != b) visit_pair(a, b);
    }
  }

  std::size_t kbest = 0;
  for (std::size_t k = 1; k < kn; ++k)
    if (best[k] < best[kbest]) kbest = k;
  return RhoConstants{best[kbest], n0_grid[kbest], arg[kbest]};
}

// radius <= rho at the cell containing the center.
inline bool is_subcritical(const RhoFunction& rho, const Ball& b) {
  validate_ball(b, rho.values.domain.dim);
  const Index c = cell_of(rho.values.domain, b.center);
  if (c < 0) throw invalid_input("is_subcritical: center-outside-domain");
  return b.radius <= rho.values.values[c];
}

struct PotentialRho {
  RhoFunction rho;
  std::vector<std::uint8_t> clamped;  // 1 where the radius grid was exhausted
  Index clamped_count = 0;
};

// rho_V(x) = sup { r : r^{2-dim} int_{B(x,r)} V <= 1 }, the ball integral
// clipped to the box.  Scans the radius grid for the largest admissible entry
// and refines one bracket by bisection to relative 1e-6; out-of-range cells
// clamp to the grid ends and are flagged.
inline PotentialRho rho_from_potential(const GridFunction& V, const RadiusGrid& radii) {
  const Domain& d = V.domain;
  for (Index i = 0; i < static_cast<Index>(V.values.size()); ++i)
    if (!(V.values[i] >= 0.0) || !std::isfinite(V.values[i]))
      throw invalid_input("rho_from_potential: potential must be nonnegative and finite");
  bool any = false;
  for (double v : V.values)
    if (v > 0.0) {
      any = true;
      break;
    }
  if (!any)
    throw numeric_error("rho_from_potential: zero-potential (every radius is admissible)");
  if (radii.radii.empty()) throw invalid_input("rho_from_potential: empty radius grid");

  BallAverager acc(d, V.values, true);
  const double meas = d.cell_measure();
  const double expo = 2.0 - static_cast<double>(d.dim);
  const Index n = d.cell_count();
  const Index m = static_cast<Index>(radii.radii.size());

  PotentialRho out;
  out.rho.values.domain = d;
  out.rho.values.values.assign(n, 0.0);
  out.rho.values.nonneg = true;
  out.clamped.assign(n, 0);

  for (Index i = 0; i < n; ++i) {
    const Point x = d.cell_center(i);
    auto F = [&](double r) {
      const double mass = meas * acc.query(Ball{x, r}, BallPath::prefix).sum;
      return std::pow(r, expo) * mass;
    };
    Index k = -1;
    for (Index j = m - 1; j >= 0; --j) {
      if (F(radii.radii[j]) <= 1.0) {
        k = j;
        break;
      }
    }
    if (k < 0) {
      out.rho.values.values[i] = radii.radii.front();
      out.clamped[i] = 1;
      ++out.clamped_count;
      continue;
    }
    if (k == m - 1) {
      out.rho.values.values[i] = radii.radii.back();
      out.clamped[i] = 1;
      ++out.clamped_count;
      continue;
    }
    double lo = radii.radii[k], hi = radii.radii[k + 1];
    while (hi - lo > 1e-6 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (F(mid) <= 1.0) lo = mid;
      else hi = mid;
    }
    out.rho.values.values[i] = lo;
  }
  return out;
}

// sup over the family of (avg_B V^q)^{1/q} / (avg_B V), clipped measure.
inline double reverse_holder_constant(const GridFunction& V, double q,
                                      const BallFamily& balls) {
  if (!(q > 1.0)) throw invalid_input("reverse_holder_constant: need q > 1");
  const Domain& d = V.domain;
  std::vector<double> vq(V.values.size());
  for (std::size_t i = 0; i < V.values.size(); ++i) {
    const double v = V.values[i];
    if (!(v >= 0.0) || !std::isfinite(v))
      throw invalid_input("reverse_holder_constant: potential must be nonnegative");
    vq[i] = std::pow(v, q);
  }
  if (balls.balls.empty()) throw invalid_input("reverse_holder_constant: empty ball family");
  BallAverager a1(d, V.values, true);
  BallAverager aq(d, std::move(vq), true);
  double sup = 0.0;
  for (const Ball& b : balls.balls) {
    const auto q1 = a1.query(b, BallPath::prefix);
    if (q1.clipped_count == 0)
      throw numeric_error("reverse_holder_constant: empty-ball in family");
    const double m1 = q1.sum / static_cast<double>(q1.clipped_count);
    if (m1 == 0.0)
      throw numeric_error("reverse_holder_constant: zero-mass ball (avg of V vanishes)");
    const auto q2 = aq.query(b, BallPath::prefix);
    const double mq = q2.sum / static_cast<double>(q2.clipped_count);
    sup = std::max(sup, std::pow(mq, 1.0 / q) / m1);
  }
  return sup;
}

}  // namespace varlux
