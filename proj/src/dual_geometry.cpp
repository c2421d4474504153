#include "expander/dual_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace expander {

std::vector<double> DualField::boundary_trace() const {
  std::vector<double> out;
  out.reserve(grid->n_theta);
  for (int a = 0; a < grid->n_theta; ++a) out.push_back(values[grid->index(grid->n_r, a)]);
  return out;
}

double w_star(double x, double y) { return std::sqrt(std::max(0.0, 1.0 - (x * x + y * y))); }

Eigen::Matrix2d eval_gamma_star(const Eigen::Vector2d& xi) {
  const double r2 = xi.squaredNorm();
  if (!(r2 < 1.0)) {
    std::ostringstream os;
    os << "|xi|=" << std::sqrt(r2);
    throw Error(ErrorCode::OutsideBall, os.str());
  }
  const double w = std::sqrt(1.0 - r2);
  return Eigen::Matrix2d::Identity() - xi * xi.transpose() / (1.0 + w);
}

double sigma_k(const std::vector<double>& lambda, int k) {
  if (k < 0 || k > static_cast<int>(lambda.size())) return 0.0;
  std::vector<double> e(k + 1, 0.0);
  e[0] = 1.0;
  for (double l : lambda) {
    for (int m = k; m >= 1; --m) e[m] += l * e[m - 1];
  }
  return e[k];
}

std::array<double, 2> radii_from_local_hessian(double w, double hrr, double hrt, double htt) {
  const double a = w * w * w * hrr;
  const double b = w * w * hrt;
  const double d = w * htt;
  const double mean = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), b);
  return {mean - rad, mean + rad};
}

FieldGeometry::FieldGeometry(const DualField& field)
    : FieldGeometry(field, std::make_shared<PolarStencil>(*field.grid)) {}

FieldGeometry::FieldGeometry(const DualField& field, std::shared_ptr<const PolarStencil> stencil)
    : field_(field), stencil_(std::move(stencil)) {
  hessian_ = stencil_->hessian(field_.values);
  gradient_ = stencil_->gradient(field_.values);
}

std::array<double, 2> FieldGeometry::curvature_radii(int node) const {
  const BallGrid& g = *field_.grid;
  const double w = w_star(g.x[node], g.y[node]);
  const auto lam = radii_from_local_hessian(w, hessian_.hrr[node], hessian_.hrt[node], hessian_.htt[node]);
  if (!(lam[0] > 0.0)) {
    std::ostringstream os;
    os << "node " << node << " at (" << g.x[node] << ", " << g.y[node] << ") lambda_min=" << lam[0];
    throw Error(ErrorCode::SingularHessian, os.str());
  }
  return lam;
}

double FieldGeometry::support_v(int node) const {
  const BallGrid& g = *field_.grid;
  return expander::support_v(field_.values[node], g.x[node], g.y[node]);
}

double FieldGeometry::min_second_difference(int node) const {
  const int W = field_.grid->stencil_width;
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2 * W; ++k) {
    const double psi = k * std::numbers::pi / (2.0 * W);
    m = std::min(m, directional_second(psi, hessian_.hrr[node], hessian_.hrt[node], hessian_.htt[node]));
  }
  return m;
}

std::array<double, 2> curvature_radii(const DualField& field, int node) {
  return FieldGeometry(field).curvature_radii(node);
}

double support_v(double u_star, double x, double y) {
  const double r2 = x * x + y * y;
  if (!(r2 < 1.0)) {
    std::ostringstream os;
    os << "|xi|=" << std::sqrt(r2);
    throw Error(ErrorCode::OutsideBall, os.str());
  }
  return u_star / std::sqrt(1.0 - r2);
}

void require_discrete_convexity(const FieldGeometry& geo, double tol) {
  const BallGrid& g = *geo.field().grid;
  const auto& H = geo.hessian();
  for (int p = 0; p < g.interior_count(); ++p) {
    const double m = geo.min_second_difference(p);
    const double scale = 1.0 + std::abs(H.hrr[p] + H.htt[p]);
    if (m < -tol * scale) {
      std::ostringstream os;
      os << "second difference " << m << " at node " << p << " (" << g.x[p] << ", " << g.y[p] << ")";
      throw Error(ErrorCode::NonConvexInput, os.str());
    }
  }
}

namespace {

// max over θ' of x·(cos θ', sin θ') + φ(θ'): dense scan, then Newton polish.
std::pair<double, double> boundary_circle_max(const BoundaryData& phi, double x, double y, int scan) {
  const double R = std::hypot(x, y);
  const double th = std::atan2(y, x);
  auto f = [&](double t) { return R * std::cos(t - th) + phi.value(t); };
  double bt = 0.0, bf = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < scan; ++i) {
    const double t = 2.0 * std::numbers::pi * i / scan;
    const double v = f(t);
    if (v > bf) bf = v, bt = t;
  }
  for (int it = 0; it < 30; ++it) {
    const double d1 = -R * std::sin(bt - th) + phi.d_theta(bt);
    const double d2 = -R * std::cos(bt - th) + phi.d2_theta(bt);
    if (!(d2 < 0.0)) break;
    const double t = bt - d1 / d2;
    const double v = f(t);
    if (!(v > bf)) break;
    bf = v, bt = t;
  }
  return {bf, bt};
}

}  // namespace

PrimalSurface legendre_transform(const DualField& field, const std::vector<double>& xs,
                                 const std::vector<double>& ys, double convexity_tol, const BoundaryData* boundary) {
  FieldGeometry geo(field);
  require_discrete_convexity(geo, convexity_tol);
  const BallGrid& g = *field.grid;
  const int N = g.node_count();
  const auto& u = field.values;

  PrimalSurface s;
  const std::size_t S = xs.size();
  s.x = xs;
  s.y = ys;
  s.u.resize(S);
  s.dux.resize(S);
  s.duy.resize(S);
  s.normal.resize(S);
  s.kappa.resize(S);
  s.v.resize(S);
  s.xi_norm.resize(S);
  s.dual_node.resize(S);
  s.boundary_supported.resize(S);

  std::vector<double> vals(N);
  for (std::size_t i = 0; i < S; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (int q = 0; q < N; ++q) {
      vals[q] = xs[i] * g.x[q] + ys[i] * g.y[q] - u[q];
      best = std::max(best, vals[q]);
    }
    int arg = -1;
    for (int q = 0; q < N; ++q) {
      if (vals[q] >= best - 1e-12 && (arg < 0 || g.rho[q] < g.rho[arg])) arg = q;
    }
    const double gx = g.x[arg], gy = g.y[arg];
    s.u[i] = vals[arg];
    s.dux[i] = gx;
    s.duy[i] = gy;
    s.dual_node[i] = arg;
    s.xi_norm[i] = g.rho[arg];
    s.boundary_supported[i] = g.boundary[arg];
    const double w = w_star(gx, gy);
    if (!g.boundary[arg]) {
      s.normal[i] = {gx / w, gy / w, 1.0 / w};
      const auto lam = geo.curvature_radii(arg);
      s.kappa[i] = {1.0 / lam[0], 1.0 / lam[1]};
      s.v[i] = u[arg] / w;
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      s.normal[i] = {nan, nan, nan};
      s.kappa[i] = {0.0, 0.0};
      s.v[i] = w > 0.0 ? u[arg] / w : -std::numeric_limits<double>::infinity();
    }
    if (boundary && g.radius == 1.0) {
      const auto [bv, bt] = boundary_circle_max(*boundary, xs[i], ys[i], 16 * g.n_theta);
      if (bv > s.u[i]) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        s.u[i] = bv;
        s.dux[i] = std::cos(bt);
        s.duy[i] = std::sin(bt);
        s.xi_norm[i] = 1.0;
        s.boundary_supported[i] = 1;
        s.dual_node[i] = g.index(g.n_r, static_cast<int>(std::lround(bt / g.dtheta())));
        s.normal[i] = {nan, nan, nan};
        s.kappa[i] = {0.0, 0.0};
        s.v[i] = -std::numeric_limits<double>::infinity();
      }
    }
  }
  return s;
}

void polar_samples(const std::vector<double>& radii, int n_angles, std::vector<double>& xs,
                   std::vector<double>& ys) {
  xs.clear();
  ys.clear();
  for (double R : radii) {
    if (R == 0.0) {
      xs.push_back(0.0);
      ys.push_back(0.0);
      continue;
    }
    for (int a = 0; a < n_angles; ++a) {
      const double th = 2.0 * std::numbers::pi * a / n_angles;
      xs.push_back(R * std::cos(th));
      ys.push_back(R * std::sin(th));
    }
  }
}

std::vector<double> primal_residual(const PrimalSurface& surface, const ProblemSpec& spec) {
  std::vector<double> r(surface.size());
  for (std::size_t i = 0; i < surface.size(); ++i) {
    if (surface.boundary_supported[i]) {
      r[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const std::vector<double> kap{surface.kappa[i][0], surface.kappa[i][1]};
    r[i] = sigma_k(kap, spec.k) - std::pow(-surface.v[i], spec.alpha);
  }
  return r;
}

}  // namespace expander
