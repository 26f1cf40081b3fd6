#pragma once
// Variable exponents p(.) with 1 <= p- <= p+ < infinity, their conjugates,
// and log-Holder modulus estimates.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "varlux/errors.hpp"
#include "varlux/grid.hpp"

namespace varlux {

struct VariableExponent {
  GridFunction values;
  double p_minus = 0.0;
  double p_plus = 0.0;
};

inline VariableExponent make_exponent(GridFunction samples) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (Index i = 0; i < static_cast<Index>(samples.values.size()); ++i) {
    const double v = samples.values[i];
    if (!std::isfinite(v) || v < 1.0)
      throw invalid_input("make_exponent: out-of-range exponent " + std::to_string(v) +
                          " at cell " + std::to_string(i) + " (need 1 <= p(x) < inf)");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (samples.values.empty()) throw invalid_input("make_exponent: empty sample vector");
  VariableExponent p;
  p.values = std::move(samples);
  p.values.nonneg = true;
  p.p_minus = lo;
  p.p_plus = hi;
  return p;
}

inline VariableExponent constant_exponent(const Domain& d, double p0) {
  return make_exponent(constant_grid_function(d, p0));
}

// p'(x) = p(x)/(p(x)-1); an involution with p'' = p when p- > 1.
inline VariableExponent conjugate(const VariableExponent& p) {
  GridFunction g = p.values;
  for (Index i = 0; i < static_cast<Index>(g.values.size()); ++i) {
    const double v = p.values.values[i];
    if (v == 1.0)
      throw invalid_input("conjugate: conjugate-of-one at cell " + std::to_string(i));
    g.values[i] = v / (v - 1.0);
  }
  return make_exponent(std::move(g));
}

struct LogHolderReport {
  double c_local = 0.0;
  double c_infty = 0.0;
  double p_infty = 0.0;
  std::array<Index, 2> max_violation_pair{0, 0};  // argmax pair of the local modulus
  Index infty_argmax = 0;
};

namespace detail {
inline constexpr std::uint64_t kPairSampleSeed = 0x1db3c7a94d5e6f21ull;
inline constexpr Index kAllPairsCellCap = 4096;
inline constexpr Index kPairSampleCount = 1000000;

inline double point_dist(const Domain& d, Index a, Index b) {
  const Point pa = d.cell_center(a), pb = d.cell_center(b);
  double s = 0.0;
  for (int k = 0; k < d.dim; ++k) {
    const double t = pa[k] - pb[k];
    s = s + t * t;
  }
  return std::sqrt(s);
}
}  // namespace detail

// c_local = sup |p(x)-p(y)| log(e + 1/|x-y|), c_infty = sup |p(x)-p_inf| log(e + |x|).
// All cell pairs when the grid is small, otherwise a fixed-seed subsample.
inline LogHolderReport log_holder_constants(const VariableExponent& p,
                                            std::optional<double> p_infty_guess = {}) {
  const Domain& d = p.values.domain;
  const Index n = d.cell_count();
  LogHolderReport rep;
  if (p_infty_guess) {
    rep.p_infty = *p_infty_guess;
  } else {
    // Mean over the outermost cell shell.
    double acc = 0.0;
    Index cnt = 0;
    for (Index i = 0; i < n; ++i) {
      const auto idx = d.unflatten(i);
      bool shell = false;
      for (int k = 0; k < d.dim; ++k)
        if (idx[k] == 0 || idx[k] == d.cells_per_axis - 1) shell = true;
      if (shell) {
        acc += p.values.values[i];
        ++cnt;
      }
    }
    rep.p_infty = acc / static_cast<double>(cnt);
  }

  auto pair_value = [&](Index a, Index b) {
    const double dist = detail::point_dist(d, a, b);
    return std::abs(p.values.values[a] - p.values.values[b]) *
           std::log(std::exp(1.0) + 1.0 / dist);
  };
  if (n <= detail::kAllPairsCellCap) {
    for (Index a = 0; a < n; ++a)
      for (Index b = a + 1; b < n; ++b) {
        const double v = pair_value(a, b);
        if (v > rep.c_local) {
          rep.c_local = v;
          rep.max_violation_pair = {a, b};
        }
      }
  } else {
    std::mt19937_64 rng(detail::kPairSampleSeed);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    for (Index s = 0; s < detail::kPairSampleCount; ++s) {
      const Index a = pick(rng), b = pick(rng);
      if (a == b) continue;
      const double v = pair_value(a, b);
      if (v > rep.c_local) {
        rep.c_local = v;
        rep.max_violation_pair = {a, b};
      }
    }
  }

  for (Index i = 0; i < n; ++i) {
    const Point x = d.cell_center(i);
    double s = 0.0;
    for (int k = 0; k < d.dim; ++k) s = s + x[k] * x[k];
    const double v =
        std::abs(p.values.values[i] - rep.p_infty) * std::log(std::exp(1.0) + std::sqrt(s));
    if (v > rep.c_infty) {
      rep.c_infty = v;
      rep.infty_argmax = i;
    }
  }
  return rep;
}

}  // namespace varlux
