#include <doctest.h>

#include <cmath>

#include "expander/dual_geometry.hpp"

using namespace expander;

namespace {

GridPtr unit_grid(int n_r, double radius = 1.0) {
  GridSpec gs;
  gs.n_r = n_r;
  gs.n_theta = 2 * n_r;
  return std::make_shared<BallGrid>(build_grid(gs, radius));
}

DualField hyperboloid(GridPtr g, double c) {
  DualField f{g, std::vector<double>(g->node_count()), 1.0};
  for (int p = 0; p < g->node_count(); ++p) f.values[p] = -c * w_star(g->x[p], g->y[p]);
  return f;
}

}  // namespace

TEST_SUITE("dual_geometry") {
  TEST_CASE("gamma star") {
    const Eigen::Matrix2d G = eval_gamma_star(Eigen::Vector2d(0.6, 0.0));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(G);
    CHECK(es.eigenvalues()(0) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(es.eigenvalues()(1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(G(0, 1) == 0.0);
    CHECK_THROWS_AS(eval_gamma_star(Eigen::Vector2d(1.0, 0.0)), Error);
    CHECK_THROWS_AS(eval_gamma_star(Eigen::Vector2d(0.8, 0.7)), Error);
    CHECK(w_star(0.6, 0.0) == doctest::Approx(0.8));
  }

  TEST_CASE("elementary symmetric polynomials") {
    CHECK(sigma_k({1, 2, 3}, 0) == 1.0);
    CHECK(sigma_k({1, 2, 3}, 1) == 6.0);
    CHECK(sigma_k({1, 2, 3}, 2) == 11.0);
    CHECK(sigma_k({1, 2, 3}, 3) == 6.0);
  }

  TEST_CASE("radii of a hyperboloid hessian") {
    for (double c : {0.5, 1.0, 2.5}) {
      for (double w : {1.0, 0.6, 0.1}) {
        const auto r = radii_from_local_hessian(w, c / (w * w * w), 0.0, c / w);
        CHECK(r[0] == doctest::Approx(c).epsilon(1e-12));
        CHECK(r[1] == doctest::Approx(c).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("support function") {
    CHECK(support_v(-1.6, 0.6, 0.0) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(support_v(-1.0, 1.0, 0.0), Error);
  }

  TEST_CASE("legendre transform of a quadratic is exact at nodes") {
    const GridPtr g = unit_grid(16);
    DualField f{g, std::vector<double>(g->node_count()), 0.5};
    for (int p = 0; p < g->node_count(); ++p) f.values[p] = 0.5 * (g->x[p] * g->x[p] + g->y[p] * g->y[p]) - 1.0;
    std::vector<double> xs, ys;
    for (int p = 0; p < g->interior_count(); p += 7) xs.push_back(g->x[p]), ys.push_back(g->y[p]);
    const PrimalSurface s = legendre_transform(f, xs, ys);
    REQUIRE(s.size() == xs.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double r2 = xs[i] * xs[i] + ys[i] * ys[i];
      CHECK(s.u[i] == doctest::Approx(0.5 * r2 + 1.0).epsilon(1e-14));
      CHECK(s.dux[i] == doctest::Approx(xs[i]).epsilon(1e-14));
      CHECK(s.duy[i] == doctest::Approx(ys[i]).epsilon(1e-14));
    }
  }

  TEST_CASE("hyperboloid reconstruction") {
    const double c = 1.5;
    const GridPtr g = unit_grid(64);
    const DualField f = hyperboloid(g, c);
    std::vector<double> xs, ys;
    polar_samples({0.0, 0.5, 1.0, 2.0}, 16, xs, ys);
    CHECK(xs.size() == 1 + 3 * 16);
    const PrimalSurface s = legendre_transform(f, xs, ys);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double r2 = xs[i] * xs[i] + ys[i] * ys[i];
      CHECK(s.u[i] == doctest::Approx(std::sqrt(r2 + c * c)).epsilon(2e-3));
      CHECK(s.v[i] == doctest::Approx(-c).epsilon(2e-2));
      CHECK(s.kappa[i][0] == doctest::Approx(1.0 / c).epsilon(3e-2));
      CHECK(s.kappa[i][1] == doctest::Approx(1.0 / c).epsilon(3e-2));
      CHECK_FALSE(s.boundary_supported[i]);
    }
  }

  TEST_CASE("field geometry of a hyperboloid") {
    const GridPtr g = unit_grid(32);
    const DualField f = hyperboloid(g, 2.0);
    FieldGeometry geo(f);
    for (int p = 0; p < g->interior_count(); p += 5) {
      if (g->rho[p] > 0.8) continue;
      const auto r = geo.curvature_radii(p);
      CHECK(r[0] == doctest::Approx(2.0).epsilon(1e-2));
      CHECK(r[1] == doctest::Approx(2.0).epsilon(1e-2));
      CHECK(geo.support_v(p) == doctest::Approx(-2.0).epsilon(1e-12));
    }
    CHECK_NOTHROW(require_discrete_convexity(geo, 1e-6));
    DualField bad = f;
    for (double& v : bad.values) v = -v;
    CHECK_THROWS_AS(require_discrete_convexity(FieldGeometry(bad), 1e-6), Error);
  }
}
