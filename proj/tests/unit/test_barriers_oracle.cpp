#include <doctest.h>

#include <cmath>

#include "expander/barrier_forge.hpp"
#include "expander/radial_oracle.hpp"

using namespace expander;

namespace {

std::shared_ptr<const Discretization> disc(int n_r) {
  GridSpec gs;
  gs.n_r = n_r;
  gs.n_theta = 2 * n_r;
  return make_discretization(std::make_shared<BallGrid>(build_grid(gs, 1.0)));
}

double fd1(double (*f)(double), double h, double e) { return (f(h + e) - f(h - e)) / (2 * e); }

}  // namespace

TEST_SUITE("barrier_forge") {
  TEST_CASE("g1 values and derivatives") {
    CHECK(g1(0.01) == doctest::Approx(-0.0152718).epsilon(1e-6));
    for (double h : {0.001, 0.01, 0.05, 0.2}) {
      CHECK(g1_d1(h) == doctest::Approx(fd1(g1, h, 1e-7 * h)).epsilon(1e-6));
      CHECK(g1_d2(h) == doctest::Approx(fd1(g1_d1, h, 1e-7 * h)).epsilon(1e-6));
    }
  }

  TEST_CASE("closed-form determinant against the radial formula") {
    for (int n : {2, 3}) {
      for (double s : {0.9, 0.99}) {
        for (double r : {0.96, 0.99}) {
          const double h = 1.0 - s * r * r;
          if (!(h < std::exp(-1.0))) continue;
          const double lt = -2.0 * s * g1_d1(h);
          const double lr = 4.0 * s * s * r * r * g1_d2(h) - 2.0 * s * g1_d1(h);
          CHECK(g1_det_closed_form(n, s, r) == doctest::Approx(std::pow(lt, n - 1) * lr).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("g2 meets g1 at delta0") {
    CHECK(g2(0.1, 0.9, 0.1) == doctest::Approx(g1(0.1)).epsilon(1e-15));
  }

  TEST_CASE("profile is C2 across the blend zone") {
    const SuperPhi phi(0.99, 0.1);
    for (double h : {0.05, 0.2}) {
      const double e = 1e-9;
      CHECK(phi.value(h - e) == doctest::Approx(phi.value(h + e)).epsilon(1e-7));
      CHECK(phi.d1(h - e) == doctest::Approx(phi.d1(h + e)).epsilon(1e-6));
      CHECK(phi.d2(h - e) == doctest::Approx(phi.d2(h + e)).epsilon(1e-5));
    }
    CHECK(phi.value(0.01) == doctest::Approx(g1(0.01)));
    CHECK(phi.value(0.5) == doctest::Approx(g2(0.5, 0.99, 0.1)));
    CHECK(phi.monotone_blend());
    CHECK(phi.blend_min_eigenvalue() > 0.0);
  }

  TEST_CASE("supersolution constants") {
    ProblemSpec spec;
    spec.alpha = 1.0;
    const auto d = disc(16);
    CHECK_THROWS_AS(build_supersolution(spec, d->grid, 0.99, 0.3, 1.0), Error);
    CHECK_THROWS_AS(build_supersolution(spec, d->grid, 0.99, 0.0, 1.0), Error);
    CHECK_THROWS_AS(build_supersolution(spec, d->grid, 0.3, 0.1, 1.0), Error);
    const Supersolution sup = build_supersolution(spec, d->grid, 0.99, 0.1, 2.0);
    CHECK(sup.rho > 0.0);
    CHECK(sup.max_operator_ratio <= 1.0);
  }

  TEST_CASE("blow-up certificate grows") {
    const auto cert = blowup_certificate(1.0, 0.1, 8);
    REQUIRE(cert.size() == 8);
    for (std::size_t i = 1; i < cert.size(); ++i) CHECK(cert[i].gradient > cert[i - 1].gradient);
  }

  TEST_CASE("barrier constants") {
    ProblemSpec spec;
    spec.alpha = 2.0;
    const auto d = disc(16);
    ContinuationSchedule sch;
    sch.s_values = {0.5, 0.75, 0.9};
    CHECK_THROWS_AS(solve_ubar_star(spec, d, sch, 0.0), Error);
    CHECK_THROWS_AS(solve_ubar_star(spec, d, sch, 2.0), Error);
    CHECK_THROWS_AS(solve_u0_star(spec, d, sch, 0.5, -1.0), Error);
    CHECK(default_K(spec) == doctest::Approx(1.0));
  }

  TEST_CASE("u0 star is the explicit paraboloid") {
    ProblemSpec spec;
    spec.alpha = 1.0;
    const auto d = disc(16);
    const double C1 = 4.0;
    const BarrierRun run = solve_u0_star(spec, d, ContinuationSchedule{}, C1, -1.5);
    const BallGrid& g = *d->grid;
    for (int p = 0; p < g.node_count(); ++p)
      CHECK(run.last().values[p] == doctest::Approx((g.rho[p] * g.rho[p] - 1.0) / (2.0 * std::sqrt(C1)) - 1.0).epsilon(1e-9));
  }

  TEST_CASE("psi barrier coefficient") {
    ProblemSpec spec;
    spec.alpha = 2.0;
    const auto d = disc(16);
    DualField u0{d->grid, std::vector<double>(d->grid->node_count(), -1.0), 0.0};
    const PsiBarrier psi = boundary_barrier_psi(spec, 0.99, u0);
    CHECK(psi.kcoef == doctest::Approx(3.0));
  }
}

TEST_SUITE("radial_oracle") {
  TEST_CASE("gauss alpha = n is exact") {
    for (double s : {0.5, 0.9, 0.99}) {
      const RadialProfile prof = solve_radial_gauss(2, 2.0, s, -std::sqrt((1.0 - s) / s));
      for (double r : {0.0, 0.3, 0.7, 0.95, 1.0})
        CHECK(prof.value(r) == doctest::Approx(-std::sqrt((1.0 - s * r * r) / s)).epsilon(1e-8));
    }
  }

  TEST_CASE("constant-radius quotient solution") {
    const double rb = 0.9;
    const RadialProfile prof = solve_radial_quotient(2, 1, 1.0, rb, -std::sqrt(2.0) * std::sqrt(1.0 - rb * rb));
    for (double r : {0.0, 0.4, 0.8, 0.9})
      CHECK(prof.value(r) == doctest::Approx(-std::sqrt(2.0) * std::sqrt(1.0 - r * r)).epsilon(1e-8));
  }

  TEST_CASE("three-dimensional quotient") {
    const RadialProfile prof = solve_radial_quotient(3, 2, 1.5, 0.9, -1.0);
    CHECK(prof.max_residual <= 1e-8);
    CHECK(prof.shooting_monotone);
  }

  TEST_CASE("rejections") {
    CHECK_THROWS_AS(solve_radial_quotient(2, 2, 1.0, 0.9, -1.0), Error);
    CHECK_THROWS_AS(solve_radial_gauss(2, 1.0, 0.9, 0.5), Error);
    try {
      solve_radial_gauss(2, 1.0, 0.9, 0.0);
      FAIL("expected an exception");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonnegativePotential);
    }
  }

  TEST_CASE("grid comparison") {
    GridSpec gs;
    gs.n_r = 16;
    gs.n_theta = 32;
    const auto g = std::make_shared<BallGrid>(build_grid(gs, 1.0));
    const RadialProfile prof = solve_radial_gauss(2, 2.0, 0.9, -std::sqrt(0.1 / 0.9));
    DualField f{g, std::vector<double>(g->node_count()), 0.9};
    for (int p = 0; p < g->node_count(); ++p) f.values[p] = prof.value(g->rho[p]);
    CHECK(compare_with_grid(prof, f).max_rel < 1e-12);
  }
}
