#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "varlux/cover.hpp"
#include "varlux/expr.hpp"

using namespace varlux;

namespace {

// independent replay of the greedy construction with a full-scan membership test
BallFamily oracle_critical(const RhoFunction& rho) {
  const Domain& d = rho.values.domain;
  const Index n = d.cell_count();
  std::vector<bool> covered(n, false);
  BallFamily fam;
  for (Index cursor = 0; cursor < n; ++cursor) {
    if (covered[cursor]) continue;
    const Ball b{d.cell_center(cursor), rho.values.values[cursor]};
    fam.balls.push_back(b);
    for (Index c = 0; c < n; ++c) {
      const Point y = d.cell_center(c);
      double s = 0.0;
      for (int k = 0; k < d.dim; ++k) {
        const double t = y[k] - b.center[k];
        s = s + t * t;
      }
      if (s < b.radius * b.radius) covered[c] = true;
    }
  }
  return fam;
}

double center_dist(const Ball& a, const Ball& b, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double t = a.center[k] - b.center[k];
    s += t * t;
  }
  return std::sqrt(s);
}

// every cell of b0 lies inside at least one family ball
bool covers_ball(const Domain& d, const Ball& b0, const BallFamily& fam) {
  bool ok = true;
  for_each_cell_in_ball(d, b0, [&](Index c) {
    const Point y = d.cell_center(c);
    for (const Ball& p : fam.balls) {
      double s = 0.0;
      for (int k = 0; k < d.dim; ++k) {
        const double t = y[k] - p.center[k];
        s = s + t * t;
      }
      if (s < p.radius * p.radius) return;
    }
    ok = false;
  });
  return ok;
}

Index overlap_at_one(const Domain& d, const BallFamily& fam) {
  std::vector<Index> hits(d.cell_count(), 0);
  for (const Ball& b : fam.balls)
    for_each_cell_in_ball(d, b, [&](Index c) { ++hits[c]; });
  Index mx = 0;
  for (Index h : hits) mx = std::max(mx, h);
  return mx;
}

}  // namespace

TEST_CASE("one huge ball covers the box") {
  const Domain d1 = build_domain(1, 1.0, 16);
  CHECK(critical_covering(constant_rho(d1, 2.1)).balls.size() == 1);
  const Domain d2 = build_domain(2, 1.0, 12);
  const BallFamily f2 = critical_covering(constant_rho(d2, 2.1 * std::sqrt(2.0)));
  CHECK(f2.balls.size() == 1);
  CHECK(f2.provenance == FamilyTag::critical_cover);
}

TEST_CASE("sub-spacing radius gives one ball per cell") {
  const Domain d = build_domain(1, 1.0, 32);
  const BallFamily f = critical_covering(constant_rho(d, d.spacing() / 1.9));
  CHECK(f.balls.size() == static_cast<std::size_t>(d.cell_count()));
  const OverlapReport rep = overlap_audit(f, 1.0, d);
  CHECK(rep.covered);
  CHECK(rep.max_overlap == 1);
}

TEST_CASE("greedy cover replays the simulation oracle") {
  for (int dim : {1, 2}) {
    const Domain d = build_domain(dim, 2.0, dim == 1 ? 32 : 16);
    const RhoFunction rho = make_rho(sample(parse("1/(1+norm2(x))"), d));
    const BallFamily got = critical_covering(rho);
    const BallFamily want = oracle_critical(rho);
    REQUIRE(got.balls.size() == want.balls.size());
    for (std::size_t i = 0; i < got.balls.size(); ++i) {
      CHECK(got.balls[i].center == want.balls[i].center);
      CHECK(got.balls[i].radius == want.balls[i].radius);
    }
  }
}

TEST_CASE("reciprocal profile cover on a fine line") {
  const Domain d = build_domain(1, 4.0, 256);
  const RhoFunction rho = make_rho(sample(parse("1/(1+norm2(x))"), d));
  const BallFamily f = critical_covering(rho);
  CHECK(f.balls.size() == 23);
  const OverlapReport rep = overlap_audit(f, 1.0, d);
  CHECK(rep.covered);
  CHECK(rep.max_overlap >= 1);
  CHECK(rep.fitted_n1 > 0.7);
  CHECK(rep.fitted_n1 < 0.85);

  Index prev = 0;
  for (double beta : {1.0, 2.0, 4.0, 8.0}) {
    const Index mo = overlap_audit(f, beta, d).max_overlap;
    CHECK(mo >= prev);
    prev = mo;
  }
}

TEST_CASE("plane cover of the reciprocal profile") {
  const Domain d = build_domain(2, 2.0, 64);
  const BallFamily f = critical_covering(make_rho(sample(parse("1/(1+norm2(x))"), d)));
  CHECK(f.balls.size() == 105);
  const OverlapReport rep = overlap_audit(f, 1.0, d);
  CHECK(rep.covered);
  CHECK(rep.max_overlap == 5);
}

TEST_CASE("separated covering of a line ball") {
  const Domain d = build_domain(1, 2.0, 256);
  const RhoFunction rho = constant_rho(d, 1.0);
  const RhoConstants fc = verify_critical(rho);
  const Ball b0{{0.0, 0.0, 0.0}, 1.5};
  const SubcriticalCovering sc = subcritical_covering(b0, rho, 2.0, fc);

  CHECK(sc.delta0 == 0.25);
  CHECK(sc.family.balls.size() == 48);
  CHECK(sc.family.provenance == FamilyTag::subcritical_cover);
  CHECK(sc.count_bound == kSubcriticalCountC1[0] * 4.0);
  CHECK(static_cast<double>(sc.family.balls.size()) <= sc.count_bound);

  for (const Ball& p : sc.family.balls) {
    CHECK(p.radius == sc.delta0 / 4.0);
    CHECK(center_dist(p, b0, 1) < b0.radius);
  }
  // separation certificate: half-radius balls cannot intersect
  for (std::size_t i = 0; i < sc.family.balls.size(); ++i)
    for (std::size_t j = i + 1; j < sc.family.balls.size(); ++j)
      CHECK(center_dist(sc.family.balls[i], sc.family.balls[j], 1) >= sc.delta0 / 4.0);

  CHECK(covers_ball(d, b0, sc.family));
  CHECK(overlap_at_one(d, sc.family) <= 5);
}

TEST_CASE("separated covering of a plane ball") {
  const Domain d = build_domain(2, 2.0, 128);
  const RhoFunction rho = constant_rho(d, 1.0);
  const Ball b0{{0.0, 0.0, 0.0}, 1.45};
  const SubcriticalCovering sc = subcritical_covering(b0, rho, 1.5);

  CHECK(sc.family.balls.size() == 1178);
  CHECK(static_cast<double>(sc.family.balls.size()) <= sc.count_bound);
  CHECK_THAT(sc.delta0, Catch::Matchers::WithinRel(1.0 / 3.9, 1e-14));

  const double min_sep = sc.delta0 / 4.0;
  double worst = 1e300;
  for (std::size_t i = 0; i < sc.family.balls.size(); ++i)
    for (std::size_t j = i + 1; j < sc.family.balls.size(); ++j)
      worst = std::min(worst, center_dist(sc.family.balls[i], sc.family.balls[j], 2));
  CHECK(worst >= min_sep);

  CHECK(covers_ball(d, b0, sc.family));
  CHECK(overlap_at_one(d, sc.family) <= 25);
}

TEST_CASE("separated covering of a space ball") {
  const Domain d = build_domain(3, 1.0, 112);
  const RhoFunction rho = constant_rho(d, 0.5);
  const RhoConstants fc{1.0, 1.0, {0, 0}};
  const Ball b0{{0.0, 0.0, 0.0}, 0.55};
  const SubcriticalCovering sc = subcritical_covering(b0, rho, 1.2, fc);

  CHECK(sc.family.balls.size() == 11049);
  CHECK(static_cast<double>(sc.family.balls.size()) <= sc.count_bound);
  CHECK(overlap_at_one(d, sc.family) <= 125);

  const double min_sep2 = (sc.delta0 / 4.0) * (sc.delta0 / 4.0);
  double worst = 1e300;
  for (std::size_t i = 0; i < sc.family.balls.size(); ++i)
    for (std::size_t j = i + 1; j < sc.family.balls.size(); ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double t = sc.family.balls[i].center[k] - sc.family.balls[j].center[k];
        s += t * t;
      }
      worst = std::min(worst, s);
    }
  CHECK(worst >= min_sep2);
}

TEST_CASE("subcritical covering contract errors") {
  const Domain d = build_domain(1, 2.0, 256);
  const RhoFunction rho = constant_rho(d, 1.0);
  const RhoConstants fc = verify_critical(rho);

  CHECK_THROWS_WITH(subcritical_covering(Ball{{0.0, 0, 0}, 0.8}, rho, 2.0, fc),
                    Catch::Matchers::ContainsSubstring("hypothesis-violation"));
  CHECK_THROWS_WITH(subcritical_covering(Ball{{0.0, 0, 0}, 2.5}, rho, 2.0, fc),
                    Catch::Matchers::ContainsSubstring("hypothesis-violation"));
  CHECK_THROWS_AS(subcritical_covering(Ball{{0.0, 0, 0}, 1.5}, rho, 0.5, fc), invalid_input);
  CHECK_THROWS_WITH(subcritical_covering(Ball{{9.0, 0, 0}, 1.5}, rho, 2.0, fc),
                    Catch::Matchers::ContainsSubstring("center-outside-domain"));

  const Domain coarse = build_domain(1, 2.0, 16);
  CHECK_THROWS_WITH(
      subcritical_covering(Ball{{0.0, 0, 0}, 1.5}, constant_rho(coarse, 1.0), 2.0, fc),
      Catch::Matchers::ContainsSubstring("grid-too-coarse"));
}

TEST_CASE("overlap audit basics") {
  const Domain d = build_domain(1, 2.0, 64);
  BallFamily two;
  two.balls.push_back(Ball{{-1.0, 0, 0}, 0.3});
  two.balls.push_back(Ball{{1.0, 0, 0}, 0.3});
  const OverlapReport rep = overlap_audit(two, 1.0, d);
  CHECK(rep.max_overlap == 1);
  CHECK_FALSE(rep.covered);

  BallFamily rep3;
  for (int k = 0; k < 3; ++k) rep3.balls.push_back(Ball{{0.0, 0, 0}, 0.5});
  for (double beta : {1.0, 2.0, 8.0})
    CHECK(overlap_audit(rep3, beta, d).max_overlap == 3);
  CHECK_THAT(overlap_audit(rep3, 1.0, d).fitted_n1, Catch::Matchers::WithinAbs(0.0, 1e-12));

  CHECK_THROWS_AS(overlap_audit(BallFamily{}, 1.0, d), invalid_input);
  CHECK_THROWS_AS(overlap_audit(two, 0.5, d), invalid_input);
}
