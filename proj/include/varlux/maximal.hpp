#pragma once
// Hardy-Littlewood type maximal operators over the radius grid: the plain
// sup, the sub-critical restriction, the theta-penalized sup, and its split
// at the critical scale.

#include <cmath>
#include <vector>

#include "varlux/errors.hpp"
#include "varlux/grid.hpp"
#include "varlux/parallel.hpp"
#include "varlux/rho.hpp"

namespace varlux {

namespace detail {

inline BallAverager abs_averager(const GridFunction& f) {
  std::vector<double> v = f.values;
  if (!f.nonneg)
    for (auto& x : v) x = std::abs(x);
  return BallAverager(f.domain, std::move(v), true);
}

}  // namespace detail

// M f(x) = max over grid radii of avg_{B(x,r)} |f|.  Balls centered on cells
// always contain their own center, so no radius is skipped.
inline GridFunction hl_maximal(const GridFunction& f, const RadiusGrid& radii,
                               MeasureMode mode = MeasureMode::clipped) {
  if (radii.radii.empty()) throw invalid_input("hl_maximal: empty radius grid");
  const Domain& d = f.domain;
  const BallAverager acc = detail::abs_averager(f);
  GridFunction out;
  out.domain = d;
  out.values.assign(d.cell_count(), 0.0);
  out.nonneg = true;
  parallel_for(d.cell_count(), [&](Index i) {
    const Point x = d.cell_center(i);
    double best = 0.0;
    for (double r : radii.radii) {
      const auto q = acc.query(Ball{x, r}, BallPath::prefix);
      const Index den = mode == MeasureMode::full ? q.lattice_count : q.clipped_count;
      if (den == 0) continue;
      best = std::max(best, q.sum / static_cast<double>(den));
    }
    out.values[i] = best;
  });
  return out;
}

// Restriction to sub-critical scales: per-cell radius set
// { r in radii : r <= rho(x) } plus the endpoint rho(x) itself.
inline GridFunction local_maximal(const GridFunction& f, const RhoFunction& rho,
                                  const RadiusGrid& radii,
                                  MeasureMode mode = MeasureMode::clipped) {
  if (radii.radii.empty()) throw invalid_input("local_maximal: empty radius grid");
  if (f.domain != rho.values.domain)
    throw invalid_input("local_maximal: f and rho live on different domains");
  const Domain& d = f.domain;
  const BallAverager acc = detail::abs_averager(f);
  GridFunction out;
  out.domain = d;
  out.values.assign(d.cell_count(), 0.0);
  out.nonneg = true;
  parallel_for(d.cell_count(), [&](Index i) {
    const Point x = d.cell_center(i);
    const double rx = rho.values.values[i];
    double best = 0.0;
    auto consider = [&](double r) {
      const auto q = acc.query(Ball{x, r}, BallPath::prefix);
      const Index den = mode == MeasureMode::full ? q.lattice_count : q.clipped_count;
      if (den == 0) return;
      best = std::max(best, q.sum / static_cast<double>(den));
    };
    for (double r : radii.radii) {
      if (r > rx) break;
      consider(r);
    }
    consider(rx);  // endpoint; contains the cell itself, so never empty
    out.values[i] = best;
  });
  return out;
}

// M^theta f(x) = max over grid radii of (1 + r/rho(x))^{-theta} avg_{B(x,r)} |f|.
inline GridFunction theta_maximal(const GridFunction& f, const RhoFunction& rho, double theta,
                                  const RadiusGrid& radii,
                                  MeasureMode mode = MeasureMode::clipped) {
  if (radii.radii.empty()) throw invalid_input("theta_maximal: empty radius grid");
  if (f.domain != rho.values.domain)
    throw invalid_input("theta_maximal: f and rho live on different domains");
  if (!(theta >= 0.0)) throw invalid_input("theta_maximal: need theta >= 0");
  const Domain& d = f.domain;
  const BallAverager acc = detail::abs_averager(f);
  GridFunction out;
  out.domain = d;
  out.values.assign(d.cell_count(), 0.0);
  out.nonneg = true;
  parallel_for(d.cell_count(), [&](Index i) {
    const Point x = d.cell_center(i);
    const double rx = rho.values.values[i];
    double best = 0.0;
    for (double r : radii.radii) {
      const auto q = acc.query(Ball{x, r}, BallPath::prefix);
      const Index den = mode == MeasureMode::full ? q.lattice_count : q.clipped_count;
      if (den == 0) continue;
      const double pen = std::pow(1.0 + r / rx, -theta);
      best = std::max(best, pen * (q.sum / static_cast<double>(den)));
    }
    out.values[i] = best;
  });
  return out;
}

struct ThetaSplit {
  GridFunction m1;  // penalized sup over r <= rho(x)
  GridFunction m2;  // penalized sup over r > rho(x); 0 on an empty radius set
  std::vector<int> m2_dyadic;  // shell index j with 2^{j-1} rho < r* <= 2^j rho; -1 if none
};

// Splits the penalized sup at the critical scale.  The two restricted sups
// partition exactly the radius grid of theta_maximal, so
// max(m1, m2) <= M^theta <= m1 + m2 holds cellwise by construction.
inline ThetaSplit theta_split(const GridFunction& f, const RhoFunction& rho, double theta,
                              const RadiusGrid& radii,
                              MeasureMode mode = MeasureMode::clipped) {
  if (radii.radii.empty()) throw invalid_input("theta_split: empty radius grid");
  if (f.domain != rho.values.domain)
    throw invalid_input("theta_split: f and rho live on different domains");
  const Domain& d = f.domain;
  const BallAverager acc = detail::abs_averager(f);
  ThetaSplit out;
  out.m1.domain = d;
  out.m1.values.assign(d.cell_count(), 0.0);
  out.m1.nonneg = true;
  out.m2 = out.m1;
  out.m2_dyadic.assign(d.cell_count(), -1);
  parallel_for(d.cell_count(), [&](Index i) {
    const Point x = d.cell_center(i);
    const double rx = rho.values.values[i];
    double b1 = 0.0, b2 = 0.0, r2best = 0.0;
    for (double r : radii.radii) {
      const auto q = acc.query(Ball{x, r}, BallPath::prefix);
      const Index den = mode == MeasureMode::full ? q.lattice_count : q.clipped_count;
      if (den == 0) continue;
      const double v = std::pow(1.0 + r / rx, -theta) * (q.sum / static_cast<double>(den));
      if (r <= rx) {
        b1 = std::max(b1, v);
      } else if (v > b2) {
        b2 = v;
        r2best = r;
      }
    }
    out.m1.values[i] = b1;
    out.m2.values[i] = b2;
    if (r2best > 0.0)
      out.m2_dyadic[i] = static_cast<int>(std::ceil(std::log2(r2best / rx)));
  });
  return out;
}

// A^eta_B f = (1 + r/rho(x0))^{-eta} (avg_B |f|) chi_B, x0 the ball center.
inline GridFunction penalized_average(const GridFunction& f, const Ball& b, double eta,
                                      const RhoFunction& rho) {
  const Domain& d = f.domain;
  if (d != rho.values.domain)
    throw invalid_input("penalized_average: f and rho live on different domains");
  if (!(eta >= 0.0)) throw invalid_input("penalized_average: need eta >= 0");
  validate_ball(b, d.dim);
  const Index c0 = cell_of(d, b.center);
  if (c0 < 0) throw invalid_input("penalized_average: center-outside-domain");
  const double psi = std::pow(1.0 + b.radius / rho.values.values[c0], -eta);
  const double avg = ball_average(f, b);
  GridFunction out;
  out.domain = d;
  out.values.assign(d.cell_count(), 0.0);
  out.nonneg = true;
  for_each_cell_in_ball(d, b, [&](Index c) { out.values[c] = psi * avg; });
  return out;
}

}  // namespace varlux
