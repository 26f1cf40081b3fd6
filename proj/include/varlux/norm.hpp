#pragma once
// Modulars and Luxemburg norms on variable Lebesgue spaces over the grid,
// plus the Holder/duality defect probes and the ball transfer operator.

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "varlux/errors.hpp"
#include "varlux/exponent.hpp"
#include "varlux/grid.hpp"

namespace varlux {

// rho_p(f/lambda) = h^dim * sum (|f_i|/lambda)^{p_i}, pairwise-summed.
inline double modular(const GridFunction& f, const VariableExponent& p, double lambda) {
  if (f.domain != p.values.domain)
    throw invalid_input("modular: f and p live on different domains");
  if (!(lambda > 0.0)) throw invalid_input("modular: lambda must be positive");
  const Index n = f.domain.cell_count();
  const double* fv = f.values.data();
  const double* pv = p.values.values.data();
  const double s = pairwise_sum(n, [&](Index i) {
    const double a = std::abs(fv[i]) / lambda;
    return a == 0.0 ? 0.0 : std::pow(a, pv[i]);
  });
  return f.domain.cell_measure() * s;
}

namespace detail {

// Modular restricted to an explicit cell subset (zero elsewhere).
inline double modular_cells(const Domain& dom, std::span<const Index> cells,
                            const double* vals, const double* pvals, double lambda) {
  const double s = pairwise_sum(static_cast<Index>(cells.size()), [&](Index k) {
    const double a = std::abs(vals[cells[k]]) / lambda;
    return a == 0.0 ? 0.0 : std::pow(a, pvals[cells[k]]);
  });
  return dom.cell_measure() * s;
}

}  // namespace detail

struct NormResult {
  double value = 0.0;
  int iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

namespace detail {

inline constexpr double kLuxemburgRelTol = 1e-12;
inline constexpr int kLuxemburgMaxIter = 200;

// Bisection on lambda |-> modular(f/lambda): decreasing, so the unit modular
// level is a bracket endpoint game.  Seed lambda0 = (int |f|^{p-})^{1/p-}.
template <class Modular>
NormResult luxemburg_bisect(double lambda0, Modular&& mod) {
  NormResult r;
  if (!(lambda0 > 0.0) || !std::isfinite(lambda0))
    throw numeric_error("luxemburg_norm: overflow while seeding the bracket");
  double m0 = mod(lambda0);
  if (!std::isfinite(m0))
    throw numeric_error("luxemburg_norm: overflow (modular non-finite at initial bracket)");
  double lo, hi;
  if (m0 > 1.0) {
    lo = lambda0;
    hi = lambda0;
    int guard = 0;
    do {
      hi *= 2.0;
      if (++guard > 4096 || !std::isfinite(hi))
        throw numeric_error("luxemburg_norm: overflow while expanding the bracket");
    } while (mod(hi) > 1.0);
    r.iterations = guard;
  } else {
    hi = lambda0;
    lo = lambda0;
    int guard = 0;
    while (mod(lo) <= 1.0) {
      hi = lo;
      lo *= 0.5;
      if (++guard > 4096 || lo == 0.0) {
        // modular stays <= 1 all the way down; the norm is 0 only for f = 0,
        // which callers handle before calling here.  Treat as degenerate.
        r.value = hi;
        r.bracket_lo = lo;
        r.bracket_hi = hi;
        return r;
      }
    }
    r.iterations = guard;
  }
  // Invariant: mod(lo) > 1 >= mod(hi).
  while (hi - lo > kLuxemburgRelTol * hi && r.iterations < kLuxemburgMaxIter) {
    const double mid = 0.5 * (lo + hi);
    if (mod(mid) > 1.0) lo = mid;
    else hi = mid;
    ++r.iterations;
  }
  r.value = hi;  // upper end: modular(f/value) <= 1
  r.bracket_lo = lo;
  r.bracket_hi = hi;
  return r;
}

}  // namespace detail

inline NormResult luxemburg_norm(const GridFunction& f, const VariableExponent& p) {
  if (f.domain != p.values.domain)
    throw invalid_input("luxemburg_norm: f and p live on different domains");
  bool all_zero = true;
  for (double v : f.values)
    if (v != 0.0) {
      all_zero = false;
      break;
    }
  if (all_zero) return NormResult{0.0, 0, 0.0, 0.0};
  const double pm = p.p_minus;
  const double seed_int = f.domain.cell_measure() *
                          pairwise_sum(static_cast<Index>(f.values.size()), [&](Index i) {
                            const double a = std::abs(f.values[i]);
                            return a == 0.0 ? 0.0 : std::pow(a, pm);
                          });
  const double lambda0 = std::pow(seed_int, 1.0 / pm);
  return detail::luxemburg_bisect(lambda0, [&](double lam) { return modular(f, p, lam); });
}

// Norm of f restricted to an explicit support (cells need not be sorted).
inline NormResult luxemburg_norm_cells(const Domain& dom, std::span<const Index> cells,
                                       const double* vals, const VariableExponent& p) {
  bool all_zero = true;
  for (Index c : cells)
    if (vals[c] != 0.0) {
      all_zero = false;
      break;
    }
  if (cells.empty() || all_zero) return NormResult{0.0, 0, 0.0, 0.0};
  const double pm = p.p_minus;
  const double seed_int =
      dom.cell_measure() * pairwise_sum(static_cast<Index>(cells.size()), [&](Index k) {
        const double a = std::abs(vals[cells[k]]);
        return a == 0.0 ? 0.0 : std::pow(a, pm);
      });
  const double* pv = p.values.values.data();
  return detail::luxemburg_bisect(std::pow(seed_int, 1.0 / pm), [&](double lam) {
    return detail::modular_cells(dom, cells, vals, pv, lam);
  });
}

// || f w ||_{p(.)} with w acting as a multiplier; w must be positive.
inline double weighted_norm(const GridFunction& f, const VariableExponent& p,
                            const GridFunction& w) {
  if (w.domain != f.domain)
    throw invalid_input("weighted_norm: f and w live on different domains");
  GridFunction fw;
  fw.domain = f.domain;
  fw.values.resize(f.values.size());
  for (Index i = 0; i < static_cast<Index>(f.values.size()); ++i) {
    const double wi = w.values[i];
    if (!(wi > 0.0) || !std::isfinite(wi))
      throw invalid_input("weighted_norm: non-positive-weight at cell " + std::to_string(i));
    fw.values[i] = f.values[i] * wi;
  }
  return luxemburg_norm(fw, p).value;
}

// int |f g| / (||f||_p ||g||_{p'}); at most 2 by the generalized Holder bound.
inline double holder_defect(const GridFunction& f, const GridFunction& g,
                            const VariableExponent& p) {
  const double nf = luxemburg_norm(f, p).value;
  const double ng = luxemburg_norm(g, conjugate(p)).value;
  if (nf == 0.0 || ng == 0.0)
    throw numeric_error("holder_defect: division-by-zero (a factor has zero norm)");
  const double prod = f.domain.cell_measure() *
                      pairwise_sum(static_cast<Index>(f.values.size()), [&](Index i) {
                        return std::abs(f.values[i] * g.values[i]);
                      });
  return prod / (nf * ng);
}

struct DualityReport {
  double best = 0.0;       // max over all tried witnesses of int |f g|
  double canonical = 0.0;  // the canonical witness alone
};

// Lower duality probe: sup over unit-ball witnesses g of int |f g|.  The
// canonical witness g0 = (|f|/||f||)^{p-1}, renormalized into the unit ball,
// already reaches ||f|| up to bisection error; random witnesses are extra.
inline DualityReport duality_lower_witness(const GridFunction& f, const VariableExponent& p,
                                           int trials, std::uint64_t seed) {
  const VariableExponent pc = conjugate(p);
  const double nf = luxemburg_norm(f, p).value;
  if (nf == 0.0) throw numeric_error("duality_lower_witness: zero-function");
  const Index n = f.domain.cell_count();

  auto pair_with = [&](const GridFunction& g) {
    const double ng = luxemburg_norm(g, pc).value;
    if (ng == 0.0) return 0.0;
    const double s = f.domain.cell_measure() * pairwise_sum(n, [&](Index i) {
                       return std::abs(f.values[i] * g.values[i]);
                     });
    return s / ng;
  };

  GridFunction g0;
  g0.domain = f.domain;
  g0.values.resize(n);
  for (Index i = 0; i < n; ++i)
    g0.values[i] = std::pow(std::abs(f.values[i]) / nf, p.values.values[i] - 1.0);
  g0.nonneg = true;

  DualityReport rep;
  rep.canonical = pair_with(g0);
  rep.best = rep.canonical;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    GridFunction g;
    g.domain = f.domain;
    g.values.resize(n);
    for (Index i = 0; i < n; ++i) g.values[i] = u(rng);
    rep.best = std::max(rep.best, pair_with(g));
  }
  return rep;
}

// T f = sum_B chi_B ||f chi_B||_{p,w} / ||chi_B||_{p,w}, then || T f ||_{p,w}.
inline double transfer_norm(const GridFunction& f, const VariableExponent& p,
                            const GridFunction& w, const BallFamily& family) {
  if (f.domain != p.values.domain || f.domain != w.domain)
    throw invalid_input("transfer_norm: mismatched domains");
  if (family.balls.empty()) throw invalid_input("transfer_norm: empty ball family");
  const Index n = f.domain.cell_count();
  std::vector<double> fw(n), wv(n);
  for (Index i = 0; i < n; ++i) {
    const double wi = w.values[i];
    if (!(wi > 0.0) || !std::isfinite(wi))
      throw invalid_input("transfer_norm: non-positive-weight at cell " + std::to_string(i));
    fw[i] = f.values[i] * wi;
    wv[i] = wi;
  }
  GridFunction step;
  step.domain = f.domain;
  step.values.assign(n, 0.0);
  step.nonneg = true;
  std::vector<Index> cells;
  for (const Ball& b : family.balls) {
    cells.clear();
    for_each_cell_in_ball(f.domain, b, [&](Index c) { cells.push_back(c); });
    if (cells.empty())
      throw numeric_error("transfer_norm: empty-ball (a family ball has no cells)");
    const double num = luxemburg_norm_cells(f.domain, cells, fw.data(), p).value;
    const double den = luxemburg_norm_cells(f.domain, cells, wv.data(), p).value;
    const double q = num / den;
    for (Index c : cells) step.values[c] += q;
  }
  return weighted_norm(step, p, w);
}

}  // namespace varlux
