#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "varlux/exponent.hpp"
#include "varlux/expr.hpp"
#include "varlux/grid.hpp"

using namespace varlux;

namespace {

// full-pair scan of the local log-Holder modulus, small grids only
double oracle_c_local(const VariableExponent& p) {
  const Domain& d = p.values.domain;
  double best = 0.0;
  for (Index a = 0; a < d.cell_count(); ++a) {
    for (Index b = a + 1; b < d.cell_count(); ++b) {
      const Point xa = d.cell_center(a), xb = d.cell_center(b);
      double s = 0.0;
      for (int k = 0; k < d.dim; ++k) s += (xa[k] - xb[k]) * (xa[k] - xb[k]);
      const double dist = std::sqrt(s);
      const double m = std::abs(p.values.values[a] - p.values.values[b]) *
                       std::log(std::exp(1.0) + 1.0 / dist);
      best = std::max(best, m);
    }
  }
  return best;
}

double oracle_c_infty(const VariableExponent& p, double p_infty) {
  const Domain& d = p.values.domain;
  double best = 0.0;
  for (Index a = 0; a < d.cell_count(); ++a) {
    const Point x = d.cell_center(a);
    double s = 0.0;
    for (int k = 0; k < d.dim; ++k) s += x[k] * x[k];
    best = std::max(best, std::abs(p.values.values[a] - p_infty) *
                              std::log(std::exp(1.0) + std::sqrt(s)));
  }
  return best;
}

}  // namespace

TEST_CASE("make_exponent caches the bounds") {
  const Domain d = build_domain(1, 2.0, 16);
  const VariableExponent c2 = constant_exponent(d, 2.0);
  CHECK(c2.p_minus == 2.0);
  CHECK(c2.p_plus == 2.0);

  const VariableExponent pv = make_exponent(sample(parse("2+1/log(exp(1)+norm2(x))"), d));
  CHECK(pv.p_minus > 2.0);
  CHECK(pv.p_plus <= 3.0);
  double lo = 1e300, hi = -1e300;
  for (double v : pv.values.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(pv.p_minus == lo);
  CHECK(pv.p_plus == hi);
}

TEST_CASE("make_exponent rejects values below one") {
  const Domain d = build_domain(1, 1.0, 4);
  GridFunction g = constant_grid_function(d, 2.0);
  g.values[2] = 0.9;
  CHECK_THROWS_AS(make_exponent(g), invalid_input);
  g.values[2] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(make_exponent(g), invalid_input);
}

TEST_CASE("conjugate pointwise identity") {
  const Domain d = build_domain(1, 2.0, 32);
  CHECK(conjugate(constant_exponent(d, 2.0)).p_minus == 2.0);
  CHECK(conjugate(constant_exponent(d, 3.0)).p_plus == 1.5);

  const VariableExponent p = make_exponent(sample(parse("1.5+0.5*abs(x1)"), d));
  const VariableExponent pc = conjugate(p);
  const VariableExponent pcc = conjugate(pc);
  for (Index i = 0; i < d.cell_count(); ++i) {
    CHECK_THAT(1.0 / p.values.values[i] + 1.0 / pc.values.values[i],
               Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(pcc.values.values[i], Catch::Matchers::WithinAbs(p.values.values[i], 1e-12));
  }

  GridFunction one_cell = constant_grid_function(d, 2.0);
  one_cell.values[5] = 1.0;
  CHECK_THROWS_AS(conjugate(make_exponent(one_cell)), invalid_input);
}

TEST_CASE("log-Holder constants against the all-pairs oracle") {
  const Domain d = build_domain(1, 3.0, 48);
  const VariableExponent p = make_exponent(sample(parse("2+1/log(exp(1)+norm2(x))"), d));
  const LogHolderReport rep = log_holder_constants(p);
  CHECK_THAT(rep.c_local, Catch::Matchers::WithinRel(oracle_c_local(p), 1e-12));
  CHECK_THAT(rep.c_infty, Catch::Matchers::WithinRel(oracle_c_infty(p, rep.p_infty), 1e-12));

  // with the continuum limit value pinned: the decay term is exactly 1
  const LogHolderReport pinned = log_holder_constants(p, 2.0);
  CHECK(pinned.p_infty == 2.0);
  CHECK(pinned.c_infty <= 1.0 + 1e-9);
}

TEST_CASE("constant exponent has zero log-Holder constants") {
  const Domain d = build_domain(2, 1.0, 8);
  const LogHolderReport rep = log_holder_constants(constant_exponent(d, 2.5));
  CHECK(rep.c_local == 0.0);
  CHECK(rep.c_infty == 0.0);
  CHECK(rep.p_infty == 2.5);
}

TEST_CASE("a jump makes c_local diverge under refinement") {
  std::vector<double> cs;
  for (Index n : {16, 32, 64, 128}) {
    const Domain d = build_domain(1, 1.0, n);
    GridFunction g;
    g.domain = d;
    g.values.assign(d.cell_count(), 2.0);
    for (Index i = 0; i < d.cell_count(); ++i)
      if (d.coord(i) > 0.0) g.values[i] = 3.0;
    g.nonneg = true;
    cs.push_back(log_holder_constants(make_exponent(g)).c_local);
  }
  CHECK(cs[1] > cs[0]);
  CHECK(cs[2] > cs[1]);
  CHECK(cs[3] > cs[2]);
}

TEST_CASE("log-Holder determinism") {
  const Domain d = build_domain(2, 2.0, 16);
  const VariableExponent p = make_exponent(sample(parse("2+0.3*abs(x1)+0.1*abs(x2)"), d));
  const LogHolderReport a = log_holder_constants(p);
  const LogHolderReport b = log_holder_constants(p);
  CHECK(a.c_local == b.c_local);
  CHECK(a.c_infty == b.c_infty);
  CHECK(a.p_infty == b.p_infty);
  CHECK(a.max_violation_pair == b.max_violation_pair);
}
