#pragma once
// Muckenhoupt-type ball quotients |B|^{-1} ||w chi_B||_p ||w^{-1} chi_B||_{p'}
// and the class constants built from them: the global sup, the sub-critical
// sup, and the theta-penalized profile.

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "varlux/errors.hpp"
#include "varlux/exponent.hpp"
#include "varlux/grid.hpp"
#include "varlux/norm.hpp"
#include "varlux/parallel.hpp"
#include "varlux/rho.hpp"

namespace varlux {

// Every (center, radius) pair with centers on the strided cell lattice.
// The strided lattice takes indices stride-1, 2*stride-1, ... per axis, so
// stride 1 keeps every cell and stride > n keeps none.  interior_only drops
// balls that stick out of the box.
inline BallFamily sweep_balls(const Domain& d, Index centers_stride, const RadiusGrid& radii,
                              bool interior_only) {
  if (centers_stride < 1) throw invalid_input("sweep_balls: stride must be >= 1");
  if (radii.radii.empty()) throw invalid_input("sweep_balls: empty radius grid");
  const Index n = d.cells_per_axis;
  std::vector<Index> axis;
  for (Index i = centers_stride - 1; i < n; i += centers_stride) axis.push_back(i);
  const double L = d.half_width;
  BallFamily out;
  out.provenance = FamilyTag::sweep;
  auto emit = [&](const Point& c) {
    for (double r : radii.radii) {
      if (interior_only) {
        bool inside = true;
        for (int k = 0; k < d.dim; ++k)
          if (c[k] - r < -L || c[k] + r > L) {
            inside = false;
            break;
          }
        if (!inside) continue;
      }
      out.balls.push_back(Ball{c, r});
    }
  };
  if (d.dim == 1) {
    for (Index i : axis) emit(Point{d.coord(i), 0.0, 0.0});
  } else if (d.dim == 2) {
    for (Index i0 : axis)
      for (Index i1 : axis) emit(Point{d.coord(i0), d.coord(i1), 0.0});
  } else {
    for (Index i0 : axis)
      for (Index i1 : axis)
        for (Index i2 : axis) emit(Point{d.coord(i0), d.coord(i1), d.coord(i2)});
  }
  if (out.balls.empty()) throw invalid_input("sweep_balls: empty-sweep (no balls survive)");
  return out;
}

// Per-ball norm data for a fixed (w, p).  Constant p uses the closed form
// ||w chi_B||_{p0} = (h^d sum_B w^{p0})^{1/p0} through prefix tables; variable
// p falls back to the Luxemburg bisection on the ball's cells.
class WeightBallNorms {
 public:
  struct Entry {
    double w_norm = 0.0;
    double winv_norm = 0.0;
    double measure = 0.0;
    double quotient = 0.0;
    Index cells = 0;
  };

  WeightBallNorms(const GridFunction& w, const VariableExponent& p, bool allow_fast = true)
      : dom_(w.domain), p_(p) {
    if (w.domain != p.values.domain)
      throw invalid_input("weight-quotient: w and p live on different domains");
    if (!(p.p_minus > 1.0))
      throw invalid_input("weight-quotient: need p- > 1 (conjugate exponent unbounded)");
    const Index n = dom_.cell_count();
    for (Index i = 0; i < n; ++i) {
      const double v = w.values[i];
      if (!(v > 0.0) || !std::isfinite(v))
        throw invalid_input("weight-quotient: non-positive-weight at cell " + std::to_string(i));
    }
    fast_ = allow_fast && p.p_minus == p.p_plus;
    if (fast_) {
      p0_ = p.p_minus;
      q0_ = p0_ / (p0_ - 1.0);
      std::vector<double> wp(n), wq(n);
      for (Index i = 0; i < n; ++i) {
        wp[i] = std::pow(w.values[i], p0_);
        wq[i] = std::pow(w.values[i], -q0_);
      }
      pow_w_.emplace(dom_, std::move(wp), true);
      pow_winv_.emplace(dom_, std::move(wq), true);
    } else {
      w_ = w.values;
      winv_.resize(n);
      for (Index i = 0; i < n; ++i) winv_[i] = 1.0 / w.values[i];
      pconj_ = conjugate(p);
    }
  }

  Entry eval(const Ball& b) const {
    validate_ball(b, dom_.dim);
    Entry e;
    if (fast_) {
      const auto qw = pow_w_->query(b, BallPath::prefix);
      if (qw.clipped_count == 0)
        throw numeric_error("weight-quotient: empty-ball (no cell centers inside)");
      const auto qv = pow_winv_->query(b, BallPath::prefix);
      const double h = dom_.cell_measure();
      e.cells = qw.clipped_count;
      e.measure = h * static_cast<double>(e.cells);
      e.w_norm = std::pow(h * qw.sum, 1.0 / p0_);
      e.winv_norm = std::pow(h * qv.sum, 1.0 / q0_);
    } else {
      std::vector<Index> cells;
      for_each_cell_in_ball(dom_, b, [&](Index c) { cells.push_back(c); });
      if (cells.empty())
        throw numeric_error("weight-quotient: empty-ball (no cell centers inside)");
      e.cells = static_cast<Index>(cells.size());
      e.measure = dom_.cell_measure() * static_cast<double>(e.cells);
      e.w_norm = luxemburg_norm_cells(dom_, cells, w_.data(), p_).value;
      e.winv_norm = luxemburg_norm_cells(dom_, cells, winv_.data(), *pconj_).value;
    }
    e.quotient = e.w_norm * e.winv_norm / e.measure;
    return e;
  }

  bool fast_path() const { return fast_; }
  const Domain& domain() const { return dom_; }

 private:
  Domain dom_;
  VariableExponent p_;
  std::optional<VariableExponent> pconj_;
  bool fast_ = false;
  double p0_ = 0.0, q0_ = 0.0;
  std::optional<BallAverager> pow_w_, pow_winv_;
  std::vector<double> w_, winv_;
};

struct ApResult {
  double value = 0.0;
  Ball witness{};
  Index witness_index = -1;
};

namespace detail {

// quotients[i] < 0 marks a skipped ball
inline ApResult arg_sup(const std::vector<double>& quotients, const BallFamily& balls) {
  ApResult r;
  for (std::size_t i = 0; i < quotients.size(); ++i) {
    if (quotients[i] < 0.0) continue;
    if (r.witness_index < 0 || quotients[i] > r.value) {
      r.value = quotients[i];
      r.witness = balls.balls[i];
      r.witness_index = static_cast<Index>(i);
    }
  }
  return r;
}

inline std::vector<double> ball_quotients(const WeightBallNorms& norms, const BallFamily& balls,
                                          const std::vector<char>* keep = nullptr) {
  std::vector<double> q(balls.balls.size(), -1.0);
  parallel_for(static_cast<Index>(balls.balls.size()), [&](Index i) {
    if (keep && !(*keep)[static_cast<std::size_t>(i)]) return;
    q[static_cast<std::size_t>(i)] = norms.eval(balls.balls[static_cast<std::size_t>(i)]).quotient;
  });
  return q;
}

}  // namespace detail

// [w]_{A_p} over the family: sup of the ball quotient, ties broken by list order.
inline ApResult ap_constant(const GridFunction& w, const VariableExponent& p,
                            const BallFamily& balls) {
  if (balls.balls.empty()) throw invalid_input("ap_constant: empty ball family");
  const WeightBallNorms norms(w, p);
  return detail::arg_sup(detail::ball_quotients(norms, balls), balls);
}

// Same sup restricted to sub-critical balls (r <= rho at the center cell).
inline ApResult ap_local_constant(const GridFunction& w, const VariableExponent& p,
                                  const RhoFunction& rho, const BallFamily& balls) {
  if (balls.balls.empty()) throw invalid_input("ap_local_constant: empty ball family");
  if (w.domain != rho.values.domain)
    throw invalid_input("ap_local_constant: w and rho live on different domains");
  std::vector<char> keep(balls.balls.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < balls.balls.size(); ++i) {
    keep[i] = is_subcritical(rho, balls.balls[i]) ? 1 : 0;
    any = any || keep[i];
  }
  if (!any) throw invalid_input("ap_local_constant: no-subcritical-balls");
  const WeightBallNorms norms(w, p);
  return detail::arg_sup(detail::ball_quotients(norms, balls, &keep), balls);
}

struct ThetaProfileEntry {
  double theta = 0.0;
  double sup_quotient = 0.0;
  Ball witness{};
  Index witness_index = -1;
};

struct ThetaProfile {
  std::vector<ThetaProfileEntry> entries;
  double theta_star = 0.0;
  bool theta_star_found = false;
  double cap = 0.0;
};

inline constexpr double kThetaStarCapFactor = 10.0;

// For each theta, sup over the family of quotient / (1 + r/rho(x))^theta.
// theta_star is the smallest listed theta whose sup stays below the cap on
// both the given family and the refinement (when one is supplied); the cap is
// cap_factor times the theta = 0 sup over the family's sub-critical balls.
inline ThetaProfile ap_theta_profile(const GridFunction& w, const VariableExponent& p,
                                     const RhoFunction& rho, const std::vector<double>& thetas,
                                     const BallFamily& balls,
                                     double cap_factor = kThetaStarCapFactor,
                                     const BallFamily* refined = nullptr) {
  if (balls.balls.empty()) throw invalid_input("ap_theta_profile: empty ball family");
  if (thetas.empty()) throw invalid_input("ap_theta_profile: empty theta list");
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (!(thetas[i] >= 0.0) || (i > 0 && !(thetas[i] > thetas[i - 1])))
      throw invalid_input("ap_theta_profile: thetas must be >= 0 and ascending");
  }
  if (w.domain != rho.values.domain)
    throw invalid_input("ap_theta_profile: w and rho live on different domains");
  if (!(cap_factor > 0.0)) throw invalid_input("ap_theta_profile: cap factor must be positive");

  const Domain& d = w.domain;
  struct BallData {
    double quotient;
    double scale;  // 1 + r/rho(center)
    bool subcritical;
  };
  auto gather = [&](const BallFamily& fam) {
    const WeightBallNorms norms(w, p);
    std::vector<BallData> data(fam.balls.size());
    parallel_for(static_cast<Index>(fam.balls.size()), [&](Index ii) {
      const auto i = static_cast<std::size_t>(ii);
      const Ball& b = fam.balls[i];
      const Index c = cell_of(d, b.center);
      if (c < 0) throw invalid_input("ap_theta_profile: ball center outside domain");
      const double rx = rho.values.values[c];
      data[i] = BallData{norms.eval(b).quotient, 1.0 + b.radius / rx, b.radius <= rx};
    });
    return data;
  };
  const std::vector<BallData> base = gather(balls);

  ThetaProfile out;
  for (double th : thetas) {
    ThetaProfileEntry e;
    e.theta = th;
    for (std::size_t i = 0; i < base.size(); ++i) {
      const double v = base[i].quotient * std::pow(base[i].scale, -th);
      if (e.witness_index < 0 || v > e.sup_quotient) {
        e.sup_quotient = v;
        e.witness = balls.balls[i];
        e.witness_index = static_cast<Index>(i);
      }
    }
    out.entries.push_back(e);
  }

  double baseline = -1.0;
  for (const BallData& bd : base)
    if (bd.subcritical) baseline = std::max(baseline, bd.quotient);
  if (baseline < 0.0) baseline = 1.0;  // no sub-critical balls in the family
  out.cap = cap_factor * baseline;

  std::vector<double> refined_sup;
  if (refined != nullptr) {
    const std::vector<BallData> fine = gather(*refined);
    refined_sup.assign(thetas.size(), 0.0);
    for (std::size_t t = 0; t < thetas.size(); ++t)
      for (const BallData& bd : fine)
        refined_sup[t] = std::max(refined_sup[t], bd.quotient * std::pow(bd.scale, -thetas[t]));
  }
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    double s = out.entries[t].sup_quotient;
    if (refined != nullptr) s = std::max(s, refined_sup[t]);
    if (s <= out.cap) {
      out.theta_star = thetas[t];
      out.theta_star_found = true;
      break;
    }
  }
  return out;
}

// ||chi_B w|| |E| / (||chi_E w|| |B|) for a cell set E inside B.
inline double subset_inequality_defect(const GridFunction& w, const VariableExponent& p,
                                       const Ball& b, const std::vector<Index>& e_cells) {
  if (e_cells.empty()) throw invalid_input("subset_inequality_defect: empty-E");
  const Domain& d = w.domain;
  if (d != p.values.domain)
    throw invalid_input("subset_inequality_defect: w and p live on different domains");
  validate_ball(b, d.dim);
  const double r2 = b.radius * b.radius;
  for (Index c : e_cells) {
    if (c < 0 || c >= d.cell_count())
      throw invalid_input("subset_inequality_defect: cell index out of range");
    const Point x = d.cell_center(c);
    double s = 0.0;
    for (int k = 0; k < d.dim; ++k) {
      const double t = x[k] - b.center[k];
      s = s + t * t;
    }
    if (!(s < r2))
      throw invalid_input("subset_inequality_defect: E-not-subset (cell " + std::to_string(c) +
                          " outside B)");
  }
  std::vector<Index> b_cells;
  for_each_cell_in_ball(d, b, [&](Index c) { b_cells.push_back(c); });
  if (b_cells.empty()) throw numeric_error("subset_inequality_defect: empty-ball");
  const double nb = luxemburg_norm_cells(d, b_cells, w.values.data(), p).value;
  const double ne = luxemburg_norm_cells(d, e_cells, w.values.data(), p).value;
  if (ne == 0.0) throw numeric_error("subset_inequality_defect: zero norm on E");
  const double num = nb * static_cast<double>(e_cells.size());
  const double den = ne * static_cast<double>(b_cells.size());
  return num / den;
}

struct BetaInvariance {
  double at_rho = 0.0;
  double at_beta_rho = 0.0;
  double ratio = 0.0;
};

// Sub-critical constant at rho and at beta*rho over the same sweep.  The
// second sup runs over a superset of balls, so ratio >= 1.
inline BetaInvariance beta_invariance_check(const GridFunction& w, const VariableExponent& p,
                                            const RhoFunction& rho, double beta,
                                            const BallFamily& balls) {
  if (!(beta >= 1.0) || !std::isfinite(beta))
    throw invalid_input("beta_invariance_check: need finite beta >= 1");
  BetaInvariance out;
  out.at_rho = ap_local_constant(w, p, rho, balls).value;
  RhoFunction scaled = rho;
  for (double& v : scaled.values.values) v *= beta;
  out.at_beta_rho = ap_local_constant(w, p, scaled, balls).value;
  out.ratio = out.at_beta_rho / out.at_rho;
  return out;
}

// Quotient sup for the truncated weight w chi_Q, Q = B(x0, beta rho(x0)),
// over sweep balls meeting Q.  Cells outside Q contribute 0 to the w norm and
// are excluded from the w^{-1} norm; the measure stays the full ball measure.
inline double restriction_constant(const GridFunction& w, const VariableExponent& p,
                                   const RhoFunction& rho, const Point& x0, double beta,
                                   const BallFamily& balls) {
  if (!(beta > 1.0) || !std::isfinite(beta))
    throw invalid_input("restriction_constant: need finite beta > 1");
  if (balls.balls.empty()) throw invalid_input("restriction_constant: empty ball family");
  const Domain& d = w.domain;
  if (d != p.values.domain || d != rho.values.domain)
    throw invalid_input("restriction_constant: mismatched domains");
  if (!(p.p_minus > 1.0))
    throw invalid_input("restriction_constant: need p- > 1 (conjugate exponent unbounded)");
  const Index c0 = cell_of(d, x0);
  if (c0 < 0) throw invalid_input("restriction_constant: x0 outside domain");
  const Ball q{x0, beta * rho.values.values[c0]};
  for (int k = 0; k < d.dim; ++k)
    if (x0[k] - q.radius < -d.half_width || x0[k] + q.radius > d.half_width)
      throw invalid_input("restriction_constant: Q-outside-domain");

  std::vector<char> in_q(d.cell_count(), 0);
  for_each_cell_in_ball(d, q, [&](Index c) { in_q[static_cast<std::size_t>(c)] = 1; });
  std::vector<double> winv(d.cell_count());
  for (Index i = 0; i < d.cell_count(); ++i) {
    const double v = w.values[i];
    if (!(v > 0.0) || !std::isfinite(v))
      throw invalid_input("restriction_constant: non-positive-weight at cell " +
                          std::to_string(i));
    winv[i] = 1.0 / v;
  }
  const VariableExponent pc = conjugate(p);

  double sup = -1.0;
  std::vector<Index> cells, cells_q;
  for (const Ball& b : balls.balls) {
    cells.clear();
    cells_q.clear();
    for_each_cell_in_ball(d, b, [&](Index c) {
      cells.push_back(c);
      if (in_q[static_cast<std::size_t>(c)]) cells_q.push_back(c);
    });
    if (cells_q.empty()) continue;
    const double nw = luxemburg_norm_cells(d, cells_q, w.values.data(), p).value;
    const double nv = luxemburg_norm_cells(d, cells_q, winv.data(), pc).value;
    const double meas = d.cell_measure() * static_cast<double>(cells.size());
    sup = std::max(sup, nw * nv / meas);
  }
  if (sup < 0.0)
    throw invalid_input("restriction_constant: empty-intersection sweep (no ball meets Q)");
  return sup;
}

struct ClassReport {
  ApResult ap;
  ApResult ap_local;
  ThetaProfile theta_profile;
};

inline ClassReport weight_class_report(const GridFunction& w, const VariableExponent& p,
                                       const RhoFunction& rho, const std::vector<double>& thetas,
                                       const BallFamily& balls,
                                       double cap_factor = kThetaStarCapFactor,
                                       const BallFamily* refined = nullptr) {
  ClassReport r;
  r.ap = ap_constant(w, p, balls);
  r.ap_local = ap_local_constant(w, p, rho, balls);
  r.theta_profile = ap_theta_profile(w, p, rho, thetas, balls, cap_factor, refined);
  return r;
}

}  // namespace varlux
