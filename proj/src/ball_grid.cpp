#include "expander/ball_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace expander {

namespace {

double lagrange4(const double* t, const double* v, double x) {
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double w = 1.0;
    for (int m = 0; m < 4; ++m) {
      if (m != i) w *= (x - t[m]) / (t[i] - t[m]);
    }
    sum += w * v[i];
  }
  return sum;
}

// Value along the diameter through angle index a at signed ring index j.
double diameter_value(const BallGrid& g, const std::vector<double>& v, int a, int j) {
  if (j == 0) return v[0];
  if (j > 0) return v[g.index(j, a)];
  return v[g.index(-j, a + g.n_theta / 2)];
}

double ray_value(const BallGrid& g, const std::vector<double>& v, int a, double t) {
  int j0 = static_cast<int>(std::floor(t * g.n_r)) - 1;
  j0 = std::min(j0, g.n_r - 3);
  double ts[4], vs[4];
  for (int i = 0; i < 4; ++i) {
    const int j = j0 + i;
    ts[i] = static_cast<double>(j) / g.n_r;
    vs[i] = diameter_value(g, v, a, j);
  }
  return lagrange4(ts, vs, t);
}

}  // namespace

double BallGrid::dtheta() const { return 2.0 * std::numbers::pi / n_theta; }

std::vector<int> BallGrid::neighbors(int node) const {
  std::vector<int> out;
  if (node == 0) {
    for (int a = 0; a < n_theta; ++a) out.push_back(index(1, a));
    return out;
  }
  const int j = ring_of(node);
  const int a = angle_of(node);
  for (int dj = -1; dj <= 1; ++dj) {
    const int jj = j + dj;
    if (jj < 0 || jj > n_r) continue;
    if (jj == 0) {
      out.push_back(0);
      continue;
    }
    for (int da = -1; da <= 1; ++da) {
      const int q = index(jj, a + da);
      if (q != node) out.push_back(q);
    }
  }
  return out;
}

std::vector<double> radial_levels(int n_r, double grading, double radius) {
  std::vector<double> levels(n_r + 1);
  for (int j = 0; j <= n_r; ++j) {
    levels[j] = radius * (1.0 - std::pow(1.0 - static_cast<double>(j) / n_r, grading));
  }
  levels[n_r] = radius;
  return levels;
}

BallGrid build_grid(const GridSpec& gs, double radius) {
  if (gs.n_r < 4 || gs.n_theta < 8 || gs.n_theta % 2 != 0 || !(radius > 0.0 && radius <= 1.0) ||
      !(gs.grading_exponent >= 1.0) || gs.stencil_width < 1) {
    std::ostringstream os;
    os << "n_r=" << gs.n_r << " n_theta=" << gs.n_theta << " grading=" << gs.grading_exponent
       << " radius=" << radius << " stencil_width=" << gs.stencil_width;
    throw Error(ErrorCode::DegenerateGrid, os.str());
  }
  BallGrid g;
  g.n_r = gs.n_r;
  g.n_theta = gs.n_theta;
  g.radius = radius;
  g.grading = gs.grading_exponent;
  g.stencil_width = gs.stencil_width;
  g.levels = radial_levels(gs.n_r, gs.grading_exponent, radius);
  g.angles.resize(g.n_theta);
  for (int a = 0; a < g.n_theta; ++a) g.angles[a] = g.dtheta() * a;

  const int count = g.node_count();
  g.x.assign(count, 0.0);
  g.y.assign(count, 0.0);
  g.rho.assign(count, 0.0);
  g.theta.assign(count, 0.0);
  g.boundary.assign(count, 0);
  for (int j = 1; j <= g.n_r; ++j) {
    for (int a = 0; a < g.n_theta; ++a) {
      const int p = g.index(j, a);
      g.rho[p] = g.levels[j];
      g.theta[p] = g.angles[a];
      g.x[p] = g.levels[j] * std::cos(g.angles[a]);
      g.y[p] = g.levels[j] * std::sin(g.angles[a]);
      g.boundary[p] = j == g.n_r;
    }
  }
  return g;
}

double grid_coordinate(const BallGrid& grid, double rho) {
  const double q = std::clamp(1.0 - rho / grid.radius, 0.0, 1.0);
  return 1.0 - std::pow(q, 1.0 / grid.grading);
}

double sample_polar(const BallGrid& grid, const std::vector<double>& values, double rho,
                    double theta) {
  if (rho <= 0.0) return values[0];
  const double t = grid_coordinate(grid, std::min(rho, grid.radius));
  const double dth = grid.dtheta();
  double th = std::fmod(theta, 2.0 * std::numbers::pi);
  if (th < 0) th += 2.0 * std::numbers::pi;
  const int a0 = static_cast<int>(std::floor(th / dth)) - 1;
  double ts[4], vs[4];
  for (int i = 0; i < 4; ++i) {
    ts[i] = (a0 + i) * dth;
    vs[i] = ray_value(grid, values, a0 + i, t);
  }
  return lagrange4(ts, vs, th);
}

std::vector<double> resample(const BallGrid& source, const std::vector<double>& values,
                             const BallGrid& target) {
  std::vector<double> out(target.node_count());
  for (int p = 0; p < target.node_count(); ++p) {
    out[p] = sample_polar(source, values, target.rho[p], target.theta[p]);
  }
  return out;
}

}  // namespace expander
