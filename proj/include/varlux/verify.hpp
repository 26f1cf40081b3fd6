#pragma once
// Experiment harness: boundedness ratios ||op(f) w|| / ||f w|| over a test
// family, the necessity-direction class bound, and the Schrodinger pipeline.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "varlux/errors.hpp"
#include "varlux/exponent.hpp"
#include "varlux/grid.hpp"
#include "varlux/maximal.hpp"
#include "varlux/norm.hpp"
#include "varlux/rho.hpp"
#include "varlux/weights.hpp"

namespace varlux {

enum class OperatorKind { hl, local, theta };

struct OperatorTag {
  OperatorKind kind = OperatorKind::hl;
  double theta = 0.0;  // used by OperatorKind::theta only
};

inline std::string operator_tag_name(const OperatorTag& t) {
  switch (t.kind) {
    case OperatorKind::hl:
      return "M";
    case OperatorKind::local:
      return "Mloc";
    default: {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "Mtheta(%g)", t.theta);
      return buf;
    }
  }
}

inline GridFunction apply_operator(const OperatorTag& tag, const GridFunction& f,
                                   const RhoFunction& rho, const RadiusGrid& radii,
                                   MeasureMode mode = MeasureMode::clipped) {
  switch (tag.kind) {
    case OperatorKind::hl:
      return hl_maximal(f, radii, mode);
    case OperatorKind::local:
      return local_maximal(f, rho, radii, mode);
    default:
      return theta_maximal(f, rho, tag.theta, radii, mode);
  }
}

struct TestFunction {
  std::string id;
  GridFunction f;
};

// Default test family: ball indicators, point masses, w^{-1} chi_B profiles,
// seeded uniform random fields.  max_functions 0 keeps the full list.
inline std::vector<TestFunction> make_default_test_family(const Domain& d, const GridFunction& w,
                                                          const RadiusGrid& radii,
                                                          std::uint64_t seed,
                                                          std::size_t max_functions = 0) {
  if (d != w.domain) throw invalid_input("test-family: w lives on a different domain");
  if (radii.radii.empty()) throw invalid_input("test-family: empty radius grid");
  const Index n = d.cells_per_axis;
  auto center_at = [&](Index axis_index) {
    Point c{0.0, 0.0, 0.0};
    for (int k = 0; k < d.dim; ++k) c[k] = d.coord(axis_index);
    return c;
  };
  const Point c_mid = center_at(n / 2);
  const Point c_off = center_at(n / 3);
  const double r_lo = radii.radii.front();
  const double r_hi = radii.radii[(radii.radii.size() - 1) / 2];

  std::vector<TestFunction> fam;
  auto indicator = [&](const Ball& b) {
    GridFunction g;
    g.domain = d;
    g.values.assign(d.cell_count(), 0.0);
    g.nonneg = true;
    for_each_cell_in_ball(d, b, [&](Index c) { g.values[c] = 1.0; });
    return g;
  };
  const Ball bs[4] = {{c_mid, r_lo}, {c_mid, r_hi}, {c_off, r_lo}, {c_off, r_hi}};
  for (int k = 0; k < 4; ++k)
    fam.push_back({"ball_indicator[" + std::to_string(k) + "]", indicator(bs[k])});

  const Index masses[2] = {d.cell_count() / 2, d.cell_count() / 5};
  for (int k = 0; k < 2; ++k) {
    GridFunction g;
    g.domain = d;
    g.values.assign(d.cell_count(), 0.0);
    g.values[masses[k]] = 1.0;
    g.nonneg = true;
    fam.push_back({"point_mass[" + std::to_string(k) + "]", std::move(g)});
  }

  for (int k = 0; k < 4; ++k) {
    GridFunction g;
    g.domain = d;
    g.values.assign(d.cell_count(), 0.0);
    g.nonneg = true;
    for_each_cell_in_ball(d, bs[k], [&](Index c) { g.values[c] = 1.0 / w.values[c]; });
    fam.push_back({"winv_profile[" + std::to_string(k) + "]", std::move(g)});
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 2; ++k) {
    GridFunction g;
    g.domain = d;
    g.values.resize(d.cell_count());
    for (auto& v : g.values) v = unit(rng);
    g.nonneg = true;
    fam.push_back({"random[" + std::to_string(k) + "]", std::move(g)});
  }

  if (max_functions > 0 && fam.size() > max_functions) fam.resize(max_functions);
  return fam;
}

struct RatioEntry {
  std::string id;
  double ratio = 0.0;
};

struct ExperimentReport {
  std::string operator_tag;
  std::vector<RatioEntry> ratios;
  double max_ratio = 0.0;
  int skipped = 0;  // zero-norm test functions
  std::optional<ClassReport> class_constants;
  std::vector<double> refinement_trend;  // filled by ladder drivers
};

inline ExperimentReport boundedness_ratios(const OperatorTag& tag,
                                           const std::vector<TestFunction>& f_family,
                                           const VariableExponent& p, const GridFunction& w,
                                           const RhoFunction& rho, const RadiusGrid& radii,
                                           MeasureMode mode = MeasureMode::clipped) {
  if (f_family.empty()) throw invalid_input("boundedness_ratios: empty test family");
  ExperimentReport rep;
  rep.operator_tag = operator_tag_name(tag);
  for (const TestFunction& tf : f_family) {
    const double den = weighted_norm(tf.f, p, w);
    if (den == 0.0) {
      ++rep.skipped;
      continue;
    }
    const GridFunction img = apply_operator(tag, tf.f, rho, radii, mode);
    const double num = weighted_norm(img, p, w);
    rep.ratios.push_back({tf.id, num / den});
    rep.max_ratio = std::max(rep.max_ratio, num / den);
  }
  return rep;
}

inline constexpr double kNecessityRelTol = 1e-9;

struct NecessityReport {
  double eta = 0.0;
  double theta = 0.0;  // eta / (N0 + 1) with the fitted N0
  double max_class_quotient = 0.0;
  Index witness_index = -1;
  double max_operator_ratio = 0.0;  // over the witnesses g_B = w^{-1} chi_B
  double bound = 0.0;               // 2^{d+eta+1} c_rho^theta * max_operator_ratio
  bool holds = false;
};

// Per ball: class quotient times (1 + r/rho(x0))^{-eta}, and the operator
// ratio on the witness g = w^{-1} chi_B.  The max quotient is checked against
// the measured operator sup scaled by 2^{d+eta+1} c_rho^theta.
inline NecessityReport necessity_bound(const OperatorTag& tag, const VariableExponent& p,
                                       const GridFunction& w, const RhoFunction& rho, double eta,
                                       const BallFamily& balls, const RadiusGrid& radii,
                                       const RhoConstants& fitted,
                                       MeasureMode mode = MeasureMode::clipped) {
  if (!(eta >= 0.0)) throw invalid_input("necessity_bound: need eta >= 0");
  if (balls.balls.empty()) throw invalid_input("necessity_bound: empty ball family");
  const Domain& d = w.domain;
  if (d != p.values.domain || d != rho.values.domain)
    throw invalid_input("necessity_bound: mismatched domains");

  NecessityReport rep;
  rep.eta = eta;
  rep.theta = eta / (fitted.n0 + 1.0);

  const WeightBallNorms norms(w, p);
  for (std::size_t i = 0; i < balls.balls.size(); ++i) {
    const Ball& b = balls.balls[i];
    const Index c = cell_of(d, b.center);
    if (c < 0) throw invalid_input("necessity_bound: ball center outside domain");
    const double pen = std::pow(1.0 + b.radius / rho.values.values[c], -eta);
    const double v = norms.eval(b).quotient * pen;
    if (rep.witness_index < 0 || v > rep.max_class_quotient) {
      rep.max_class_quotient = v;
      rep.witness_index = static_cast<Index>(i);
    }
    GridFunction g;
    g.domain = d;
    g.values.assign(d.cell_count(), 0.0);
    g.nonneg = true;
    for_each_cell_in_ball(d, b, [&](Index cc) { g.values[cc] = 1.0 / w.values[cc]; });
    const double den = weighted_norm(g, p, w);
    if (den == 0.0) continue;
    const double num = weighted_norm(apply_operator(tag, g, rho, radii, mode), p, w);
    rep.max_operator_ratio = std::max(rep.max_operator_ratio, num / den);
  }
  rep.bound = std::pow(2.0, d.dim + eta + 1.0) * std::pow(fitted.c_rho, rep.theta) *
              rep.max_operator_ratio;
  rep.holds = rep.max_class_quotient <= rep.bound * (1.0 + kNecessityRelTol);
  return rep;
}

struct SchrodingerReport {
  double rh_constant = 0.0;
  double rh_exponent = 0.0;
  PotentialRho rho;
  RhoConstants rho_constants;
  ExperimentReport local_report;
  ExperimentReport theta_report;
};

// Pipeline: reverse Holder constant of V, rho_V from the potential, critical
// constants of rho_V, then boundedness ratios for the local and penalized
// operators driven by rho_V.
inline SchrodingerReport schrodinger_experiment(const GridFunction& V, double q,
                                                const VariableExponent& p, const GridFunction& w,
                                                const RadiusGrid& radii, double theta = 1.0,
                                                std::uint64_t seed = 20240901,
                                                std::size_t max_functions = 8) {
  const Domain& d = V.domain;
  if (d != p.values.domain || d != w.domain)
    throw invalid_input("schrodinger_experiment: mismatched domains");

  SchrodingerReport rep;
  rep.rh_exponent = q;

  std::vector<double> small;
  for (double r : radii.radii)
    if (r <= d.half_width / 2.0) small.push_back(r);
  if (small.empty()) small.push_back(radii.radii.front());
  const Index stride = std::max<Index>(1, d.cells_per_axis / 8);
  const BallFamily rh_family = sweep_balls(d, stride, make_radius_grid(small), true);
  rep.rh_constant = reverse_holder_constant(V, q, rh_family);

  rep.rho = rho_from_potential(V, radii);
  rep.rho_constants = verify_critical(rep.rho.rho);

  const auto fam = make_default_test_family(d, w, radii, seed, max_functions);
  rep.local_report =
      boundedness_ratios(OperatorTag{OperatorKind::local, 0.0}, fam, p, w, rep.rho.rho, radii);
  rep.theta_report =
      boundedness_ratios(OperatorTag{OperatorKind::theta, theta}, fam, p, w, rep.rho.rho, radii);
  return rep;
}

}  // namespace varlux
