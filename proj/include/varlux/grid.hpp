#pragma once
// Cell-centered uniform grids on [-L, L]^dim and open-ball cell queries.
//
// Membership contract used across the whole library: a cell with per-axis
// indices (i0, i1, i2) belongs to the ball B(c, r) iff s < r*r where
//   s = 0; for each active axis k (ascending): t = x_k - c_k; s = s + t*t;
// and x_k = -L + (i_k + 0.5) * h.  Every query path (direct scans, per-row
// span walkers, prefix-sum backends) evaluates exactly this expression in
// exactly this order, so cell sets agree bit-for-bit between paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "varlux/errors.hpp"

namespace varlux {

using Index = std::int64_t;
using Point = std::array<double, 3>;  // entries beyond dim are ignored (keep them 0)

struct Domain {
  int dim = 1;
  double half_width = 1.0;
  Index cells_per_axis = 2;

  double spacing() const { return 2.0 * half_width / static_cast<double>(cells_per_axis); }
  double coord(Index i) const {
    return -half_width + (static_cast<double>(i) + 0.5) * spacing();
  }
  Index cell_count() const {
    Index n = 1;
    for (int k = 0; k < dim; ++k) n *= cells_per_axis;
    return n;
  }
  double cell_measure() const {
    double m = 1.0;
    for (int k = 0; k < dim; ++k) m *= spacing();
    return m;
  }
  Index flatten(Index i0, Index i1 = 0, Index i2 = 0) const {
    Index f = i0;
    if (dim > 1) f = f * cells_per_axis + i1;
    if (dim > 2) f = f * cells_per_axis + i2;
    return f;
  }
  std::array<Index, 3> unflatten(Index flat) const {
    std::array<Index, 3> idx{0, 0, 0};
    for (int k = dim - 1; k >= 0; --k) {
      idx[k] = flat % cells_per_axis;
      flat /= cells_per_axis;
    }
    return idx;
  }
  Point cell_center(Index flat) const {
    auto idx = unflatten(flat);
    Point p{0.0, 0.0, 0.0};
    for (int k = 0; k < dim; ++k) p[k] = coord(idx[k]);
    return p;
  }
  bool operator==(const Domain&) const = default;
};

inline Domain build_domain(int dim, double half_width, Index cells_per_axis) {
  if (dim < 1 || dim > 3)
    throw invalid_input("build_domain: invalid-domain (dim must be 1, 2, or 3)");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw invalid_input("build_domain: invalid-domain (half_width must be positive and finite)");
  if (cells_per_axis < 2)
    throw invalid_input("build_domain: invalid-domain (cells_per_axis must be at least 2)");
  return Domain{dim, half_width, cells_per_axis};
}

struct GridFunction {
  Domain domain;
  std::vector<double> values;  // row-major, axis 0 slowest
  bool nonneg = false;
};

struct Ball {
  Point center{0.0, 0.0, 0.0};
  double radius = 0.0;
};

enum class FamilyTag { critical_cover, subcritical_cover, sweep, user };

struct BallFamily {
  std::vector<Ball> balls;
  FamilyTag provenance = FamilyTag::user;
};

inline const char* family_tag_name(FamilyTag t) {
  switch (t) {
    case FamilyTag::critical_cover: return "critical-cover";
    case FamilyTag::subcritical_cover: return "subcritical-cover";
    case FamilyTag::sweep: return "sweep";
    case FamilyTag::user: return "user";
  }
  return "user";
}

struct RadiusGrid {
  std::vector<double> radii;  // strictly increasing, all positive
};

inline RadiusGrid make_radius_grid(std::vector<double> radii) {
  if (radii.empty()) throw invalid_input("make_radius_grid: empty radius list");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || !std::isfinite(radii[i]))
      throw invalid_input("make_radius_grid: radii must be positive and finite");
    if (i > 0 && !(radii[i] > radii[i - 1]))
      throw invalid_input("make_radius_grid: radii must be strictly increasing");
  }
  return RadiusGrid{std::move(radii)};
}

inline RadiusGrid make_log_radius_grid(double r_min, double r_max, int count) {
  if (!(r_min > 0.0) || !(r_max >= r_min))
    throw invalid_input("make_log_radius_grid: need 0 < r_min <= r_max");
  if (count < 1) throw invalid_input("make_log_radius_grid: count must be positive");
  std::vector<double> r;
  r.reserve(count);
  if (count == 1 || r_max == r_min) {
    r.push_back(r_min);
    if (count > 1) throw invalid_input("make_log_radius_grid: r_min == r_max needs count 1");
  } else {
    const double q = std::log(r_max / r_min) / static_cast<double>(count - 1);
    for (int i = 0; i < count; ++i) r.push_back(r_min * std::exp(q * static_cast<double>(i)));
    r.back() = r_max;
  }
  return make_radius_grid(std::move(r));
}

// Default sweep range: cell spacing up to the box diameter scale 2L.
inline RadiusGrid default_radius_grid(const Domain& d, int count = 24) {
  return make_log_radius_grid(d.spacing(), 2.0 * d.half_width, count);
}

inline void validate_ball(const Ball& b, int dim) {
  if (!(b.radius > 0.0) || !std::isfinite(b.radius))
    throw invalid_input("ball: radius must be positive and finite");
  for (int k = 0; k < dim; ++k)
    if (!std::isfinite(b.center[k])) throw invalid_input("ball: center must be finite");
}

// Flat index of the cell whose box contains p, or -1 if p is outside [-L, L)^dim.
inline Index cell_of(const Domain& d, const Point& p) {
  const double h = d.spacing();
  Index flat = 0;
  for (int k = 0; k < d.dim; ++k) {
    const double u = (p[k] + d.half_width) / h;
    if (!(u >= 0.0)) return -1;
    const Index i = static_cast<Index>(std::floor(u));
    if (i < 0 || i >= d.cells_per_axis) return -1;
    flat = flat * d.cells_per_axis + i;
  }
  return flat;
}

// ---------------------------------------------------------------------------
// Deterministic reductions.

namespace detail {

template <class Get>
double pairwise_sum_impl(Index lo, Index hi, const Get& get) {
  const Index n = hi - lo;
  if (n <= 64) {
    double s = 0.0;
    for (Index i = lo; i < hi; ++i) s += get(i);
    return s;
  }
  const Index mid = lo + n / 2;
  return pairwise_sum_impl(lo, mid, get) + pairwise_sum_impl(mid, hi, get);
}

}  // namespace detail

// Pairwise (cascade) summation; independent of thread count by construction.
template <class Get>
double pairwise_sum(Index n, const Get& get) {
  if (n <= 0) return 0.0;
  return detail::pairwise_sum_impl(0, n, get);
}

inline double pairwise_sum(std::span<const double> v) {
  return pairwise_sum(static_cast<Index>(v.size()), [&](Index i) { return v[i]; });
}

inline double integrate(const GridFunction& f) {
  return f.domain.cell_measure() * pairwise_sum(std::span<const double>(f.values));
}

// ---------------------------------------------------------------------------
// Per-row span walking.
//
// For a fixed row (all leading axes fixed) the accepted last-axis indices form
// a contiguous interval: the exact squared distances are unimodal along the
// row and round-to-nearest is monotone, so the rounded values are unimodal
// too.  The walker locates the interval with the canonical predicate itself,
// which keeps it consistent with direct scans.

namespace detail {

struct AxisInterval {
  Index lo = 0, hi = -1;  // inclusive; empty when lo > hi
  bool empty() const { return lo > hi; }
};

// Lattice indices i (not clipped to the box) with base_s2 + (x_i - ck)^2 < r2.
inline AxisInterval pred_interval(const Domain& d, double base_s2, double ck, double r,
                                  double r2) {
  const double h = d.spacing();
  const double L = d.half_width;
  auto pred = [&](Index i) {
    const double x = -L + (static_cast<double>(i) + 0.5) * h;
    const double t = x - ck;
    return base_s2 + t * t < r2;
  };
  // Nearest lattice index to ck; the true argmin is within one of the estimate.
  const Index jstar = static_cast<Index>(std::llround((ck + L) / h - 0.5));
  Index seed = jstar;
  if (!pred(seed)) {
    if (pred(jstar - 1)) seed = jstar - 1;
    else if (pred(jstar + 1)) seed = jstar + 1;
    else return AxisInterval{};
  }
  // seed is within 3h/2 of ck, so any passing index is within r/h + 3/2 of
  // seed; reach is strictly beyond that.
  const Index reach = static_cast<Index>(std::floor(r / h)) + 3;
  Index lo = seed, hi = seed + reach;
  while (hi - lo > 1) {
    const Index mid = lo + (hi - lo) / 2;
    (pred(mid) ? lo : hi) = mid;
  }
  const Index upper = lo;
  lo = seed - reach, hi = seed;
  while (hi - lo > 1) {
    const Index mid = lo + (hi - lo) / 2;
    (pred(mid) ? hi : lo) = mid;
  }
  return AxisInterval{hi, upper};
}

}  // namespace detail

// Calls fn(i0, i1, s2, jlo, jhi) for each lattice row meeting B, where s2 is
// the accumulated leading-axis squared distance and [jlo, jhi] the inclusive
// last-axis interval.  Rows and intervals are *not* clipped to the box;
// leading indices are emitted in ascending (lexicographic) order.
template <class RowFn>
void for_each_ball_row(const Domain& d, const Ball& b, RowFn&& fn) {
  validate_ball(b, d.dim);
  const double r = b.radius;
  const double r2 = r * r;
  if (d.dim == 1) {
    auto iv = detail::pred_interval(d, 0.0, b.center[0], r, r2);
    if (!iv.empty()) fn(Index{0}, Index{0}, 0.0, iv.lo, iv.hi);
    return;
  }
  auto iv0 = detail::pred_interval(d, 0.0, b.center[0], r, r2);
  for (Index i0 = iv0.lo; i0 <= iv0.hi; ++i0) {
    const double t0 = d.coord(i0) - b.center[0];
    const double s0 = t0 * t0;
    if (!(s0 < r2)) continue;
    if (d.dim == 2) {
      auto iv1 = detail::pred_interval(d, s0, b.center[1], r, r2);
      if (!iv1.empty()) fn(i0, Index{0}, s0, iv1.lo, iv1.hi);
      continue;
    }
    auto iv1 = detail::pred_interval(d, s0, b.center[1], r, r2);
    for (Index i1 = iv1.lo; i1 <= iv1.hi; ++i1) {
      const double t1 = d.coord(i1) - b.center[1];
      const double s1 = s0 + t1 * t1;
      if (!(s1 < r2)) continue;
      auto iv2 = detail::pred_interval(d, s1, b.center[2], r, r2);
      if (!iv2.empty()) fn(i0, i1, s1, iv2.lo, iv2.hi);
    }
  }
}

// Clipped enumeration of the cells of B inside the box, ascending flat order.
template <class CellFn>
void for_each_cell_in_ball(const Domain& d, const Ball& b, CellFn&& fn) {
  const Index n = d.cells_per_axis;
  for_each_ball_row(d, b, [&](Index i0, Index i1, double, Index jlo, Index jhi) {
    if (d.dim >= 2 && (i0 < 0 || i0 >= n)) return;
    if (d.dim == 3 && (i1 < 0 || i1 >= n)) return;
    const Index lo = std::max<Index>(jlo, 0);
    const Index hi = std::min<Index>(jhi, n - 1);
    Index row = 0;
    if (d.dim == 2) row = i0;
    if (d.dim == 3) row = i0 * n + i1;
    for (Index j = lo; j <= hi; ++j) fn(row * n + j);
  });
}

struct BallCounts {
  Index clipped = 0;  // cell centers inside both B and the box
  Index lattice = 0;  // lattice centers inside B on the infinite grid extension
};

inline BallCounts ball_counts(const Domain& d, const Ball& b) {
  BallCounts c;
  const Index n = d.cells_per_axis;
  for_each_ball_row(d, b, [&](Index i0, Index i1, double, Index jlo, Index jhi) {
    c.lattice += jhi - jlo + 1;
    if (d.dim >= 2 && (i0 < 0 || i0 >= n)) return;
    if (d.dim == 3 && (i1 < 0 || i1 >= n)) return;
    const Index lo = std::max<Index>(jlo, 0);
    const Index hi = std::min<Index>(jhi, n - 1);
    if (lo <= hi) c.clipped += hi - lo + 1;
  });
  return c;
}

// ---------------------------------------------------------------------------
// Prefix sums (summed-area table) for O(1) axis-aligned box sums.

class PrefixSums {
 public:
  PrefixSums(const Domain& d, std::span<const double> values) : dom_(d) {
    const Index n = d.cells_per_axis;
    if (static_cast<Index>(values.size()) != d.cell_count())
      throw invalid_input("PrefixSums: value count does not match domain");
    const Index m = n + 1;
    Index size = 1;
    for (int k = 0; k < d.dim; ++k) size *= m;
    table_.assign(size, 0.0);
    const auto at = [&](Index i0, Index i1, Index i2) -> double& {
      Index f = i0;
      if (d.dim > 1) f = f * m + i1;
      if (d.dim > 2) f = f * m + i2;
      return table_[f];
    };
    const Index n1 = d.dim > 1 ? n : 1;
    const Index n2 = d.dim > 2 ? n : 1;
    for (Index i0 = 0; i0 < n; ++i0)
      for (Index i1 = 0; i1 < n1; ++i1)
        for (Index i2 = 0; i2 < n2; ++i2)
          at(i0 + 1, d.dim > 1 ? i1 + 1 : 0, d.dim > 2 ? i2 + 1 : 0) =
              values[d.flatten(i0, i1, i2)];
    // One prefix pass per axis turns the shifted copy into the SAT.
    const Index m1 = d.dim > 1 ? m : 1;
    const Index m2 = d.dim > 2 ? m : 1;
    for (Index i0 = 1; i0 < m; ++i0)
      for (Index i1 = 0; i1 < m1; ++i1)
        for (Index i2 = 0; i2 < m2; ++i2) at(i0, i1, i2) += at(i0 - 1, i1, i2);
    if (d.dim > 1)
      for (Index i0 = 0; i0 < m; ++i0)
        for (Index i1 = 1; i1 < m1; ++i1)
          for (Index i2 = 0; i2 < m2; ++i2) at(i0, i1, i2) += at(i0, i1 - 1, i2);
    if (d.dim > 2)
      for (Index i0 = 0; i0 < m; ++i0)
        for (Index i1 = 0; i1 < m1; ++i1)
          for (Index i2 = 1; i2 < m2; ++i2) at(i0, i1, i2) += at(i0, i1, i2 - 1);
  }

  const Domain& domain() const { return dom_; }

  // Sum over cells with lo[k] <= i_k < hi[k]; ranges are clipped to the box.
  double box_sum(std::array<Index, 3> lo, std::array<Index, 3> hi) const {
    const Index n = dom_.cells_per_axis;
    const Index m = n + 1;
    for (int k = 0; k < dom_.dim; ++k) {
      lo[k] = std::clamp<Index>(lo[k], 0, n);
      hi[k] = std::clamp<Index>(hi[k], 0, n);
      if (lo[k] >= hi[k]) return 0.0;
    }
    const auto at = [&](Index i0, Index i1, Index i2) {
      Index f = i0;
      if (dom_.dim > 1) f = f * m + i1;
      if (dom_.dim > 2) f = f * m + i2;
      return table_[f];
    };
    double s = 0.0;
    const int corners = 1 << dom_.dim;
    for (int mask = 0; mask < corners; ++mask) {
      std::array<Index, 3> c{0, 0, 0};
      int drops = 0;
      for (int k = 0; k < dom_.dim; ++k) {
        if (mask & (1 << k)) {
          c[k] = lo[k];
          ++drops;
        } else {
          c[k] = hi[k];
        }
      }
      const double v = at(c[0], dom_.dim > 1 ? c[1] : 0, dom_.dim > 2 ? c[2] : 0);
      s += (drops % 2 == 0) ? v : -v;
    }
    return s;
  }

 private:
  Domain dom_;
  std::vector<double> table_;
};

// ---------------------------------------------------------------------------
// Ball sums and averages over a fixed sample vector.

enum class MeasureMode { clipped, full };
enum class BallPath { direct, prefix };

class BallAverager {
 public:
  BallAverager(const Domain& d, std::vector<double> values, bool with_prefix)
      : dom_(d), vals_(std::move(values)) {
    if (static_cast<Index>(vals_.size()) != d.cell_count())
      throw invalid_input("BallAverager: value count does not match domain");
    if (with_prefix) build_row_prefix();
  }

  struct Query {
    double sum = 0.0;
    Index clipped_count = 0;
    Index lattice_count = 0;
  };

  const Domain& domain() const { return dom_; }

  Query query(const Ball& b, BallPath path) const {
    Query q;
    const Index n = dom_.cells_per_axis;
    for_each_ball_row(dom_, b, [&](Index i0, Index i1, double, Index jlo, Index jhi) {
      q.lattice_count += jhi - jlo + 1;
      if (dom_.dim >= 2 && (i0 < 0 || i0 >= n)) return;
      if (dom_.dim == 3 && (i1 < 0 || i1 >= n)) return;
      const Index lo = std::max<Index>(jlo, 0);
      const Index hi = std::min<Index>(jhi, n - 1);
      if (lo > hi) return;
      q.clipped_count += hi - lo + 1;
      Index row = 0;
      if (dom_.dim == 2) row = i0;
      if (dom_.dim == 3) row = i0 * n + i1;
      if (path == BallPath::prefix && !rowpfx_.empty()) {
        const double* p = rowpfx_.data() + row * (n + 1);
        q.sum += p[hi + 1] - p[lo];
      } else {
        const double* v = vals_.data() + row * n;
        double s = 0.0;
        for (Index j = lo; j <= hi; ++j) s += v[j];
        q.sum += s;
      }
    });
    return q;
  }

  double average(const Ball& b, MeasureMode mode, BallPath path) const {
    const Query q = query(b, path);
    const Index denom = (mode == MeasureMode::full) ? q.lattice_count : q.clipped_count;
    if (denom == 0) throw numeric_error("ball_average: empty-ball (no cell centers inside)");
    return q.sum / static_cast<double>(denom);
  }

 private:
  void build_row_prefix() {
    const Index n = dom_.cells_per_axis;
    const Index rows = dom_.cell_count() / n;
    rowpfx_.assign(rows * (n + 1), 0.0);
    for (Index r = 0; r < rows; ++r) {
      const double* v = vals_.data() + r * n;
      double* p = rowpfx_.data() + r * (n + 1);
      p[0] = 0.0;
      for (Index j = 0; j < n; ++j) p[j + 1] = p[j] + v[j];
    }
  }

  Domain dom_;
  std::vector<double> vals_;
  std::vector<double> rowpfx_;
};

// Average of |f| over B with the chosen measure convention.  The numerator
// always uses the zero extension of f outside the box.
inline double ball_average(const GridFunction& f, const Ball& b,
                           MeasureMode mode = MeasureMode::clipped,
                           BallPath path = BallPath::direct) {
  std::vector<double> v = f.values;
  if (!f.nonneg)
    for (auto& x : v) x = std::abs(x);
  BallAverager avg(f.domain, std::move(v), path == BallPath::prefix);
  return avg.average(b, mode, path);
}

template <class Fn>
GridFunction make_grid_function(const Domain& d, Fn&& fn) {
  GridFunction g;
  g.domain = d;
  g.values.resize(d.cell_count());
  bool nonneg = true;
  for (Index i = 0; i < d.cell_count(); ++i) {
    g.values[i] = fn(d.cell_center(i));
    if (g.values[i] < 0.0) nonneg = false;
  }
  g.nonneg = nonneg;
  return g;
}

inline GridFunction constant_grid_function(const Domain& d, double c) {
  GridFunction g{d, std::vector<double>(d.cell_count(), c), c >= 0.0};
  return g;
}

}  // namespace varlux
