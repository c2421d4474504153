#pragma once

#include <utility>
#include <vector>

#include "expander/ball_grid.hpp"

namespace expander {

/// Sparse linear form Σ c_q u_q.
struct LinearForm {
  std::vector<std::pair<int, double>> terms;

  double apply(const std::vector<double>& u) const {
    double s = 0.0;
    for (const auto& [q, c] : terms) s += c * u[q];
    return s;
  }
};

/// Monotone wide-stencil second differences in fixed Cartesian directions.
///
/// Off-grid stencil points are linearly interpolated in (rho, theta), and the
/// reach is cut at the ball boundary, so every off-center coefficient is
/// nonnegative.
class WideStencil {
 public:
  WideStencil(const BallGrid& grid, int width);

  int width() const { return width_; }
  /// Second difference at `node` along ψ_pair (side 0) or ψ_pair + π/2 (side 1).
  const LinearForm& form(int node, int pair, int side) const {
    return forms_[(static_cast<std::size_t>(node) * width_ + pair) * 2 + side];
  }
  /// min over pairs of (Δ_e)₊(Δ_e⊥)₊ at an interior node.
  double det(const std::vector<double>& u, int node, int* active = nullptr) const;

 private:
  BallGrid grid_;
  int width_;
  std::vector<LinearForm> forms_;
};

/// Nonnegative interpolation weights of a point of the closed ball on the
/// polar grid.
std::vector<std::pair<int, double>> polar_linear_weights(const BallGrid& grid, double x, double y);

}  // namespace expander
