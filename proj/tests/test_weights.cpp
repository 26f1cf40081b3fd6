#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "varlux/expr.hpp"
#include "varlux/weights.hpp"

using namespace varlux;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Fixture {
  Domain d = build_domain(1, 4.0, 256);
  double h = d.spacing();
  GridFunction wexp = sample(parse("exp(x1)"), d);
  VariableExponent p2 = make_exponent(constant_grid_function(d, 2.0));
  RhoFunction rho1 = constant_rho(d, 1.0);
};

std::vector<Index> cells_of(const Domain& d, const Ball& b) {
  std::vector<Index> out;
  for_each_cell_in_ball(d, b, [&](Index c) { out.push_back(c); });
  return out;
}

}  // namespace

TEST_CASE("sweep_balls enumerates the strided lattice") {
  const Domain d = build_domain(1, 1.0, 4);
  const RadiusGrid one = make_radius_grid({d.spacing()});

  const BallFamily all = sweep_balls(d, 1, one, false);
  REQUIRE(all.balls.size() == 4);
  CHECK(all.provenance == FamilyTag::sweep);
  for (Index i = 0; i < 4; ++i) {
    CHECK(all.balls[i].center[0] == d.coord(i));
    CHECK(all.balls[i].radius == d.spacing());
  }

  const BallFamily inner = sweep_balls(d, 1, one, true);
  REQUIRE(inner.balls.size() == 2);
  CHECK(inner.balls[0].center[0] == d.coord(1));
  CHECK(inner.balls[1].center[0] == d.coord(2));

  CHECK(sweep_balls(d, 2, one, false).balls.size() == 2);
  CHECK_THROWS_AS(sweep_balls(d, 5, one, false), invalid_input);

  const Domain d2 = build_domain(2, 1.0, 4);
  CHECK(sweep_balls(d2, 1, one, false).balls.size() == 16);
}

TEST_CASE("constant weight has unit constants") {
  const Domain d = build_domain(1, 2.0, 64);
  const GridFunction w = constant_grid_function(d, 1.0);
  const BallFamily fam = sweep_balls(d, 1, make_log_radius_grid(d.spacing(), 1.0, 6), false);
  for (double p0 : {2.0, 3.0}) {
    const VariableExponent p = make_exponent(constant_grid_function(d, p0));
    const ApResult ap = ap_constant(w, p, fam);
    CHECK_THAT(ap.value, WithinAbs(1.0, 1e-12));
    const ApResult apl = ap_local_constant(w, p, constant_rho(d, 0.5), fam);
    CHECK_THAT(apl.value, WithinAbs(1.0, 1e-12));
    CHECK(apl.value <= ap.value * (1.0 + 1e-12));
  }
}

TEST_CASE("weight quotient rejects bad inputs") {
  const Domain d = build_domain(1, 1.0, 16);
  const BallFamily fam = sweep_balls(d, 4, make_radius_grid({0.25}), false);
  const VariableExponent p2 = make_exponent(constant_grid_function(d, 2.0));

  GridFunction w = constant_grid_function(d, 1.0);
  w.values[3] = 0.0;
  CHECK_THROWS_AS(ap_constant(w, p2, fam), invalid_input);
  w.values[3] = -2.0;
  CHECK_THROWS_AS(ap_constant(w, p2, fam), invalid_input);

  const GridFunction one = constant_grid_function(d, 1.0);
  const VariableExponent p1 = make_exponent(constant_grid_function(d, 1.0));
  CHECK_THROWS_AS(ap_constant(one, p1, fam), invalid_input);
  CHECK_THROWS_AS(ap_constant(one, p2, BallFamily{}), invalid_input);
}

TEST_CASE("exponential weight grows with the radius sweep") {
  const Fixture fx;
  std::vector<double> vals;
  for (double rmax : {1.0, 2.0, 4.0}) {
    const BallFamily fam = sweep_balls(fx.d, 2, make_log_radius_grid(fx.h, rmax, 10), false);
    const ApResult ap = ap_constant(fx.wexp, fx.p2, fam);
    CHECK(ap.value >= 1.0);
    vals.push_back(ap.value);
  }
  CHECK(vals[1] > 2.0 * vals[0]);
  CHECK(vals[2] > 2.0 * vals[1]);
  CHECK_THAT(vals[2], WithinRel(181.256345, 1e-6));
}

TEST_CASE("power weight stays bounded under the same sweep") {
  const Fixture fx;
  const GridFunction w = sample(parse("(1+norm2(x))^0.3"), fx.d);
  std::vector<double> vals;
  for (double rmax : {1.0, 2.0, 4.0}) {
    const BallFamily fam = sweep_balls(fx.d, 2, make_log_radius_grid(fx.h, rmax, 10), false);
    vals.push_back(ap_constant(w, fx.p2, fam).value);
  }
  for (double v : vals) {
    CHECK(v >= 1.0);
    CHECK(v <= 1.10);
  }
  CHECK(vals[2] <= 1.05 * vals[0]);
  CHECK_THAT(vals[2], WithinRel(1.042553, 1e-5));
}

TEST_CASE("class gap: local constant stable while the global one grows") {
  const Fixture fx;
  std::vector<double> locals;
  const struct { Index stride; int count; } refinements[] = {{4, 8}, {2, 11}, {1, 16}};
  for (const auto& rf : refinements) {
    const BallFamily fam =
        sweep_balls(fx.d, rf.stride, make_log_radius_grid(fx.h, 1.0, rf.count), false);
    locals.push_back(ap_local_constant(fx.wexp, fx.p2, fx.rho1, fam).value);
  }
  const double lo = *std::min_element(locals.begin(), locals.end());
  const double hi = *std::max_element(locals.begin(), locals.end());
  CHECK(hi <= lo * (1.0 + 1e-9));
  CHECK_THAT(hi, WithinRel(1.7830971, 1e-6));

  const BallFamily wide = sweep_balls(fx.d, 2, make_log_radius_grid(fx.h, 4.0, 14), false);
  const double ap = ap_constant(fx.wexp, fx.p2, wide).value;
  const double apl = ap_local_constant(fx.wexp, fx.p2, fx.rho1, wide).value;
  CHECK(apl <= ap);
  CHECK(ap > 50.0 * apl);
}

TEST_CASE("family without sub-critical balls is rejected") {
  const Domain d = build_domain(1, 4.0, 256);
  const BallFamily fam = sweep_balls(d, 8, make_radius_grid({0.5}), false);
  const GridFunction w = constant_grid_function(d, 1.0);
  const VariableExponent p = make_exponent(constant_grid_function(d, 2.0));
  CHECK_THROWS_AS(ap_local_constant(w, p, constant_rho(d, 0.05), fam), invalid_input);
}

TEST_CASE("theta profile ties to the class constants") {
  const Fixture fx;
  const GridFunction w = sample(parse("(1+norm2(x))^1.5"), fx.d);
  const RhoFunction rho = make_rho(sample(parse("1/(1+norm2(x))"), fx.d));
  const std::vector<double> thetas{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  const BallFamily base = sweep_balls(fx.d, 4, make_log_radius_grid(fx.h, 8.0, 12), false);
  const BallFamily fine = sweep_balls(fx.d, 2, make_log_radius_grid(fx.h, 8.0, 18), false);

  const ThetaProfile tp = ap_theta_profile(w, fx.p2, rho, thetas, base, 10.0, &fine);
  const ApResult ap = ap_constant(w, fx.p2, base);
  REQUIRE(tp.entries.size() == thetas.size());
  CHECK(tp.entries[0].sup_quotient == ap.value);
  CHECK(tp.entries[0].witness_index == ap.witness_index);
  for (std::size_t t = 1; t < tp.entries.size(); ++t)
    CHECK(tp.entries[t].sup_quotient <= tp.entries[t - 1].sup_quotient);
  CHECK_THAT(tp.entries[0].sup_quotient, WithinRel(2.423983, 1e-5));
  CHECK_THAT(tp.entries[6].sup_quotient, WithinRel(0.910524, 1e-4));
  CHECK_THAT(tp.cap, WithinRel(12.675313, 1e-4));

  // the default cap sits above the theta=0 sup here, so the star lands at 0;
  // a tighter cap pushes it to the first theta whose sup fits
  CHECK(tp.theta_star_found);
  CHECK(tp.theta_star == 0.0);
  const ThetaProfile tight = ap_theta_profile(w, fx.p2, rho, thetas, base, 1.5, &fine);
  CHECK(tight.theta_star_found);
  CHECK(tight.theta_star == 0.5);
  for (std::size_t t = 0; t < thetas.size(); ++t)
    CHECK(tight.entries[t].sup_quotient == tp.entries[t].sup_quotient);

  CHECK_THROWS_AS(ap_theta_profile(w, fx.p2, rho, {}, base), invalid_input);
  CHECK_THROWS_AS(ap_theta_profile(w, fx.p2, rho, {1.0, 1.0}, base), invalid_input);
  CHECK_THROWS_AS(ap_theta_profile(w, fx.p2, rho, {-0.5, 1.0}, base), invalid_input);
  CHECK_THROWS_AS(ap_theta_profile(w, fx.p2, rho, thetas, base, 0.0), invalid_input);
  BallFamily bad;
  bad.balls.push_back(Ball{{9.0, 0.0, 0.0}, 0.5});
  CHECK_THROWS_AS(ap_theta_profile(w, fx.p2, rho, thetas, bad), invalid_input);
}

TEST_CASE("subset inequality defect") {
  const Domain d = build_domain(1, 2.0, 64);
  const VariableExponent p25 = make_exponent(constant_grid_function(d, 2.5));
  const GridFunction one = constant_grid_function(d, 1.0);
  const Ball b{{0.0, 0.0, 0.0}, 0.8};
  const std::vector<Index> bc = cells_of(d, b);
  REQUIRE(!bc.empty());

  CHECK(subset_inequality_defect(one, p25, b, bc) == 1.0);

  // constant exponent, unit weight: (|E|/|B|)^{1 - 1/p}
  std::vector<Index> half(bc.begin(), bc.begin() + bc.size() / 2);
  const double frac = static_cast<double>(half.size()) / static_cast<double>(bc.size());
  const double want = std::pow(frac, 1.0 - 1.0 / 2.5);
  CHECK_THAT(subset_inequality_defect(one, p25, b, half), WithinRel(want, 1e-10));
  CHECK(subset_inequality_defect(one, p25, b, half) <= 1.0);

  CHECK_THROWS_AS(subset_inequality_defect(one, p25, b, {}), invalid_input);
  CHECK_THROWS_AS(subset_inequality_defect(one, p25, b, {0}), invalid_input);  // cell outside B

  // fuzz against the proof bound: defect <= 2 [w] with the ball's own quotient
  const RhoFunction rho = constant_rho(d, 1.0);
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> uc(-0.9, 0.9), ur(0.1, 0.95), uw(-1.5, 1.5);
  std::uniform_real_distribution<double> up(1.3, 2.8), u01(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Ball bb{{uc(rng), 0.0, 0.0}, ur(rng)};
    GridFunction w;
    w.domain = d;
    w.values.resize(d.cell_count());
    for (auto& v : w.values) v = std::exp(uw(rng));
    VariableExponent p = p25;
    if (t % 3 == 0) {
      GridFunction pv;
      pv.domain = d;
      pv.values.resize(d.cell_count());
      for (auto& v : pv.values) v = up(rng);
      p = make_exponent(pv);
    } else if (t % 3 == 1) {
      p = make_exponent(constant_grid_function(d, up(rng)));
    }
    const std::vector<Index> cells = cells_of(d, bb);
    std::vector<Index> e;
    while (e.empty())
      for (Index c : cells)
        if (u01(rng) < 0.4) e.push_back(c);
    BallFamily fam;
    fam.balls.push_back(bb);
    const double quot = ap_local_constant(w, p, rho, fam).value;
    const double defect = subset_inequality_defect(w, p, bb, e);
    CHECK(defect <= 2.0 * quot * (1.0 + 1e-9));
  }
}

TEST_CASE("beta invariance of the local class") {
  const Fixture fx;
  const BallFamily fam = sweep_balls(fx.d, 2, make_log_radius_grid(fx.h, 4.0, 14), false);

  const BetaInvariance same = beta_invariance_check(fx.wexp, fx.p2, fx.rho1, 1.0, fam);
  CHECK(same.at_rho == same.at_beta_rho);
  CHECK(same.ratio == 1.0);

  const GridFunction one = constant_grid_function(fx.d, 1.0);
  const BetaInvariance unit = beta_invariance_check(one, fx.p2, fx.rho1, 4.0, fam);
  CHECK_THAT(unit.at_rho, WithinAbs(1.0, 1e-12));
  CHECK_THAT(unit.at_beta_rho, WithinAbs(1.0, 1e-12));

  const BetaInvariance bi = beta_invariance_check(fx.wexp, fx.p2, fx.rho1, 4.0, fam);
  CHECK(bi.ratio >= 1.0);
  CHECK_THAT(bi.at_rho, WithinRel(1.619061631, 1e-6));
  CHECK_THAT(bi.at_beta_rho, WithinRel(181.256345390, 1e-6));
  CHECK_THAT(bi.ratio, WithinRel(111.9514798, 1e-6));
  CHECK(bi.at_beta_rho <= ap_constant(fx.wexp, fx.p2, fam).value);

  CHECK_THROWS_AS(beta_invariance_check(fx.wexp, fx.p2, fx.rho1, 0.5, fam), invalid_input);
}

TEST_CASE("restriction to a critical neighborhood") {
  const Fixture fx;

  // balls inside Q with a flat weight: quotient stays at one
  {
    const Domain d = build_domain(1, 2.0, 64);
    const VariableExponent p25 = make_exponent(constant_grid_function(d, 2.5));
    const GridFunction one = constant_grid_function(d, 1.0);
    BallFamily fam;
    for (double c : {-0.5, 0.0, 0.5})
      for (double r : {0.2, 0.3}) fam.balls.push_back(Ball{{c, 0.0, 0.0}, r});
    const double rc = restriction_constant(one, p25, constant_rho(d, 1.0), {0, 0, 0}, 1.5, fam);
    CHECK_THAT(rc, WithinAbs(1.0, 1e-10));
  }

  // translation-invariant quotient: restricted sup matches the local constant
  const BallFamily fam = sweep_balls(fx.d, 2, make_log_radius_grid(fx.h, 1.0, 10), false);
  const double rc = restriction_constant(fx.wexp, fx.p2, fx.rho1, {0, 0, 0}, 2.0, fam);
  const double apl = ap_local_constant(fx.wexp, fx.p2, fx.rho1, fam).value;
  CHECK_THAT(rc, WithinRel(apl, 1e-9));
  CHECK_THAT(rc, WithinRel(1.783097059, 1e-6));

  CHECK_THROWS_AS(restriction_constant(fx.wexp, fx.p2, fx.rho1, {3.9, 0, 0}, 2.0, fam),
                  invalid_input);
  CHECK_THROWS_AS(restriction_constant(fx.wexp, fx.p2, fx.rho1, {0, 0, 0}, 1.0, fam),
                  invalid_input);
  CHECK_THROWS_AS(restriction_constant(fx.wexp, fx.p2, fx.rho1, {9.0, 0, 0}, 2.0, fam),
                  invalid_input);
  BallFamily far;
  far.balls.push_back(Ball{{3.5, 0.0, 0.0}, 0.1});
  CHECK_THROWS_AS(restriction_constant(fx.wexp, fx.p2, make_rho(constant_grid_function(fx.d, 0.2)),
                                       {-3.0, 0, 0}, 1.5, far),
                  invalid_input);
}

TEST_CASE("quotient is invariant under weight-exponent conjugation") {
  const Domain d = build_domain(1, 2.0, 48);
  const BallFamily fam = sweep_balls(d, 4, make_log_radius_grid(d.spacing(), 1.0, 5), false);
  const GridFunction w = sample(parse("exp(x1/2)"), d);
  GridFunction winv = w;
  for (auto& v : winv.values) v = 1.0 / v;

  const VariableExponent p25 = make_exponent(constant_grid_function(d, 2.5));
  CHECK_THAT(ap_constant(winv, conjugate(p25), fam).value,
             WithinRel(ap_constant(w, p25, fam).value, 1e-10));

  const VariableExponent pv =
      make_exponent(sample(parse("2+1/log(exp(1)+norm2(x))"), d));
  CHECK_THAT(ap_constant(winv, conjugate(pv), fam).value,
             WithinRel(ap_constant(w, pv, fam).value, 1e-10));
}

TEST_CASE("fast constant-exponent path matches the bisection") {
  const Domain d = build_domain(1, 4.0, 128);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridFunction w;
  w.domain = d;
  w.values.resize(d.cell_count());
  for (auto& v : w.values) v = std::exp(u(rng));
  for (double p0 : {1.5, 2.0, 3.0}) {
    const VariableExponent p = make_exponent(constant_grid_function(d, p0));
    const WeightBallNorms fast(w, p, true);
    const WeightBallNorms slow(w, p, false);
    REQUIRE(fast.fast_path());
    REQUIRE(!slow.fast_path());
    for (double r : {0.1, 0.5, 1.7, 3.0}) {
      const Ball b{{0.25, 0.0, 0.0}, r};
      const auto ef = fast.eval(b);
      const auto es = slow.eval(b);
      CHECK(ef.cells == es.cells);
      CHECK(ef.measure == es.measure);
      CHECK_THAT(ef.quotient, WithinRel(es.quotient, 1e-10));
    }
  }
}

TEST_CASE("class report bundles the three constants") {
  const Fixture fx;
  const BallFamily fam = sweep_balls(fx.d, 4, make_log_radius_grid(fx.h, 1.0, 8), false);
  const std::vector<double> thetas{0.0, 1.0, 2.0};
  const ClassReport cr = weight_class_report(fx.wexp, fx.p2, fx.rho1, thetas, fam);
  CHECK(cr.ap.value == ap_constant(fx.wexp, fx.p2, fam).value);
  CHECK(cr.ap_local.value == ap_local_constant(fx.wexp, fx.p2, fx.rho1, fam).value);
  REQUIRE(cr.theta_profile.entries.size() == 3);
  CHECK(cr.theta_profile.entries[0].sup_quotient == cr.ap.value);
  CHECK(cr.ap_local.value <= cr.ap.value);
  CHECK(cr.ap.witness_index >= 0);
  CHECK(cr.ap.witness.radius > 0.0);
}
