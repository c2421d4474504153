#include <doctest.h>

#include <cmath>

#include "expander/estimate_auditor.hpp"

using namespace expander;

namespace {

GridPtr grid(int n_r, double radius = 1.0) {
  GridSpec gs;
  gs.n_r = n_r;
  gs.n_theta = 2 * n_r;
  return std::make_shared<BallGrid>(build_grid(gs, radius));
}

DualField constant(GridPtr g, double v, double param) { return {g, std::vector<double>(g->node_count(), v), param}; }

PrimalSurface samples(std::vector<double> x, std::vector<double> u, std::vector<double> dux) {
  PrimalSurface s;
  const std::size_t n = x.size();
  s.x = std::move(x);
  s.y.assign(n, 0.0);
  s.u = std::move(u);
  s.dux = std::move(dux);
  s.duy.assign(n, 0.0);
  s.normal.assign(n, {0.0, 0.0, 1.0});
  s.kappa.assign(n, {1.0, 1.0});
  s.v.assign(n, -1.0);
  s.xi_norm.assign(n, 0.0);
  s.dual_node.assign(n, 0);
  s.boundary_supported.assign(n, 0);
  return s;
}

}  // namespace

TEST_SUITE("estimate_auditor") {
  TEST_CASE("pogorelov constants") {
    const auto q2 = make_pogorelov_dual(2, 2.0);
    CHECK(q2.m_alpha == doctest::Approx(0.5));
    CHECK(q2.beta == doctest::Approx(16.0));
    const auto q3 = make_pogorelov_dual(3, 3.0);
    CHECK(q3.m_alpha == doctest::Approx(2.0 / 3.0));
    CHECK(q3.beta == doctest::Approx(12.0));
    CHECK(m_alpha(2, 1.0) == doctest::Approx(0.25));
  }

  TEST_CASE("relative variation") {
    CHECK(relative_variation({2.0, 1.5, 1.8}) == doctest::Approx(0.25));
    CHECK(relative_variation({}) == 0.0);
  }

  TEST_CASE("eta exponent of a pure power") {
    const GridPtr g = grid(32);
    const double s = 0.999;
    DualField f{g, std::vector<double>(g->node_count()), s};
    for (int p = 0; p < g->node_count(); ++p) f.values[p] = -std::pow(1.0 - s * g->rho[p] * g->rho[p], 0.7);
    const CheckRecord r = check_eta_exponent(f, constant(g, 0.0, s), 0.5);
    CHECK(r.get("slope") == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(r.get("fit_nodes") > 10);
    CHECK(r.passed);
    CHECK_FALSE(check_eta_exponent(f, constant(g, 0.0, s), 0.9).passed);
    CHECK(std::isnan(r.get("absent")));
  }

  TEST_CASE("c0 sandwich") {
    const GridPtr g = grid(8);
    const double c0 = 1.0;
    const std::vector<DualField> u{constant(g, -1.5, 0.9)};
    const std::vector<DualField> lo{constant(g, -2.0, 0.9)};
    const CheckRecord ok = check_c0_sandwich(u, lo, nullptr, c0);
    CHECK(ok.passed);
    CHECK(ok.get("min_slack") == doctest::Approx(0.5));
    const std::vector<DualField> up{constant(g, -1.5 + 2.0 * c0, 0.9)};
    CHECK_FALSE(check_c0_sandwich(up, lo, nullptr, c0).passed);
    const DualField u0 = constant(g, -1.6, 0.0);
    CHECK_FALSE(check_c0_sandwich(u, lo, &u0, c0).passed);
  }

  TEST_CASE("affine fields have no gradient variation") {
    const GridPtr g = grid(8);
    std::vector<DualField> f;
    for (double s : {0.9, 0.99, 0.999}) {
      DualField d{g, std::vector<double>(g->node_count()), s};
      for (int p = 0; p < g->node_count(); ++p) d.values[p] = -1.0 + 0.1 * g->x[p];
      f.push_back(d);
    }
    const CheckRecord r = check_gradient_upper(f);
    CHECK(r.get("max_h_grad[0.99]") == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.get("variation") < 1e-12);
    CHECK(r.passed);
    CHECK_FALSE(check_gradient_upper({f[0], f[1]}).passed);
  }

  TEST_CASE("primal pogorelov on a hyperboloid") {
    std::vector<double> x, u;
    for (int i = 0; i <= 40; ++i) x.push_back(0.5 * i), u.push_back(std::sqrt(1.0 + 0.25 * i * i));
    const PrimalSurface s = samples(x, u, std::vector<double>(x.size(), 0.0));
    const CheckRecord r = check_primal_pogorelov(s, s);
    CHECK(r.get("min_u") == 1.0);
    CHECK(r.get("cutoff_x2.fine") == doctest::Approx(1.0));
    CHECK(r.get("cutoff_x4.fine") == doctest::Approx(3.0));
    CHECK(r.get("cutoff_x8.fine") == doctest::Approx(7.0));
    CHECK(r.get("max_change") == 0.0);
    CHECK(r.passed);
  }

  TEST_CASE("gradient estimate on two samples") {
    const GridPtr g = grid(4);
    const DualField sub_dual = constant(g, -1.0, 1.0);
    const DualField sub1_dual = constant(g, -0.5, 1.0);
    const PrimalSurface sub1 = samples({0.0, 1.0}, {0.0, 0.0}, {0.0, 0.0});
    const PrimalSurface sub = samples({0.0, 1.0}, {1.0, 1.0}, {0.0, 0.0});
    const PrimalSurface upper = samples({0.0, 1.0}, {1.5, 0.0}, {0.0, 0.0});
    const PrimalSurface good = samples({0.0, 1.0}, {1.0, 0.0}, {0.8, 0.0});
    const CheckRecord r = check_gradient_estimate_bp(good, upper, sub, sub1, sub_dual, sub1_dual);
    CHECK(r.get("delta") == doctest::Approx(0.5));
    CHECK(r.get("sup_weighted_gap") == doctest::Approx(1.0));
    CHECK(r.get("region_samples") == 1.0);
    CHECK(r.get("min_relative_margin") == doctest::Approx(1.0 - (1.0 / 0.6) / 2.0));
    CHECK(r.get("outer_min_psi_minus_ubar") == doctest::Approx(0.5));
    CHECK(r.passed);
    const PrimalSurface steep = samples({0.0, 1.0}, {1.0, 0.0}, {0.9, 0.0});
    const CheckRecord b = check_gradient_estimate_bp(steep, upper, sub, sub1, sub_dual, sub1_dual);
    CHECK(b.get("violations") == 1.0);
    CHECK_FALSE(b.passed);
    CHECK_FALSE(check_gradient_estimate_bp(good, upper, sub, sub1, sub1_dual, sub_dual).passed);
  }

  TEST_CASE("hyperbolic identity of the constant-radius field") {
    const GridPtr g = grid(32, 0.9);
    DualField f{g, std::vector<double>(g->node_count()), 0.9};
    for (int p = 0; p < g->node_count(); ++p) f.values[p] = -std::sqrt(2.0) * w_star(g->x[p], g->y[p]);
    ProblemSpec spec;
    spec.k = 1;
    spec.alpha = 1.0;
    const CheckRecord r = check_quotient_residual_hyperbolic(f, spec);
    CHECK(r.get("max_relative_residual") < 5e-3);
    CHECK(r.get("singular_nodes") == 0.0);
    CHECK(r.get("lambda_max_interior") == doctest::Approx(std::sqrt(2.0)).epsilon(1e-2));
  }

  TEST_CASE("rhs monotonicity") {
    const GridPtr g = grid(8);
    ProblemSpec spec;
    spec.alpha = 1.0;
    const CheckRecord r = check_rhs_monotonicity({constant(g, -1.0, 0.9)}, spec);
    CHECK(r.passed);
    CHECK(r.get("checked_nodes") == g->interior_count());
  }

  TEST_CASE("report ordering") {
    CheckRecord a, b, c;
    a.name = "zeta", a.passed = false;
    b.name = "alpha", b.passed = true;
    c.name = "mid", c.passed = false;
    const EstimateReport rep = emit_report({a, b, c}, {{"source", "test"}});
    REQUIRE(rep.records.size() == 3);
    CHECK(rep.records[0].name == "alpha");
    CHECK(rep.records[2].name == "zeta");
    CHECK(rep.failures == std::vector<std::string>{"mid", "zeta"});
    CHECK_FALSE(rep.passed);
    CHECK_THROWS_AS(emit_report({}, {}), Error);
    CHECK_THROWS_AS(emit_report({a, a}, {}), Error);
    CHECK(emit_report({b}, {}).passed);
  }
}
