#include "expander/wide_stencil.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace expander {

std::vector<std::pair<int, double>> polar_linear_weights(const BallGrid& g, double x, double y) {
  const double rho = std::min(std::hypot(x, y), g.radius);
  double th = std::atan2(y, x);
  if (th < 0) th += 2.0 * std::numbers::pi;
  const double dth = g.dtheta();
  int a0 = static_cast<int>(std::floor(th / dth));
  const double beta = std::clamp(th / dth - a0, 0.0, 1.0);
  a0 %= g.n_theta;

  const auto it = std::upper_bound(g.levels.begin(), g.levels.end(), rho);
  int j0 = static_cast<int>(it - g.levels.begin()) - 1;
  j0 = std::clamp(j0, 0, g.n_r - 1);
  const double alpha =
      std::clamp((rho - g.levels[j0]) / (g.levels[j0 + 1] - g.levels[j0]), 0.0, 1.0);

  std::vector<std::pair<int, double>> w;
  auto add = [&](int q, double c) {
    if (c == 0.0) return;
    for (auto& e : w) {
      if (e.first == q) {
        e.second += c;
        return;
      }
    }
    w.emplace_back(q, c);
  };
  if (j0 == 0) {
    add(0, 1.0 - alpha);
  } else {
    add(g.index(j0, a0), (1.0 - alpha) * (1.0 - beta));
    add(g.index(j0, a0 + 1), (1.0 - alpha) * beta);
  }
  add(g.index(j0 + 1, a0), alpha * (1.0 - beta));
  add(g.index(j0 + 1, a0 + 1), alpha * beta);
  return w;
}

namespace {

// Largest t ≤ reach with |p + t e| ≤ radius.
double clipped_reach(double px, double py, double ex, double ey, double reach, double radius) {
  const double b = px * ex + py * ey;
  const double c = px * px + py * py - radius * radius;
  const double t = -b + std::sqrt(std::max(b * b - c, 0.0));
  return std::min(reach, t);
}

}  // namespace

WideStencil::WideStencil(const BallGrid& grid, int width) : grid_(grid), width_(width) {
  forms_.assign(static_cast<std::size_t>(grid_.node_count()) * width_ * 2, LinearForm{});
  for (int p = 0; p < grid_.node_count(); ++p) {
    if (grid_.boundary[p]) continue;
    const int j = grid_.ring_of(p);
    const double reach = j == 0 ? grid_.levels[1] : grid_.levels[j + 1] - grid_.levels[j - 1];
    for (int k = 0; k < width_; ++k) {
      for (int side = 0; side < 2; ++side) {
        const double psi = k * std::numbers::pi / (2.0 * width_) + side * std::numbers::pi / 2.0;
        const double ex = std::cos(psi), ey = std::sin(psi);
        const double tp = clipped_reach(grid_.x[p], grid_.y[p], ex, ey, reach, grid_.radius);
        const double tm = clipped_reach(grid_.x[p], grid_.y[p], -ex, -ey, reach, grid_.radius);
        LinearForm f;
        auto add = [&](int q, double c) {
          for (auto& e : f.terms) {
            if (e.first == q) {
              e.second += c;
              return;
            }
          }
          f.terms.emplace_back(q, c);
        };
        const double scale = 2.0 / (tp + tm);
        for (const auto& [q, c] : polar_linear_weights(grid_, grid_.x[p] + tp * ex, grid_.y[p] + tp * ey))
          add(q, scale * c / tp);
        for (const auto& [q, c] : polar_linear_weights(grid_, grid_.x[p] - tm * ex, grid_.y[p] - tm * ey))
          add(q, scale * c / tm);
        add(p, -scale * (1.0 / tp + 1.0 / tm));
        forms_[(static_cast<std::size_t>(p) * width_ + k) * 2 + side] = std::move(f);
      }
    }
  }
}

double WideStencil::det(const std::vector<double>& u, int node, int* active) const {
  double best = 0.0;
  int arg = 0;
  for (int k = 0; k < width_; ++k) {
    const double d = std::max(form(node, k, 0).apply(u), 0.0);
    const double e = std::max(form(node, k, 1).apply(u), 0.0);
    const double prod = d * e;
    if (k == 0 || prod < best) {
      best = prod;
      arg = k;
    }
  }
  if (active) *active = arg;
  return best;
}

}  // namespace expander
