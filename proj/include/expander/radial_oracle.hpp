#pragma once

#include <vector>

#include "expander/dual_geometry.hpp"
#include "expander/ma_operator.hpp"

namespace expander {

/// Rotationally symmetric dual solution on [0, R] with a dense graded mesh.
struct RadialProfile {
  int n = 2;
  double param = 0.0;  // s (Gauss) or r_ball (quotient)
  double radius = 1.0;
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<double> derivative;
  std::vector<double> second;
  double max_residual = 0.0;  // Simpson re-check on the midpoint-refined mesh
  bool shooting_monotone = true;

  /// Cubic Hermite interpolation; r is clamped to [0, R].
  double value(double r) const;
  double slope(double r) const;
};

/// u*''(u*'/r)^{n-1} = c·(1-sr²)^p·(-u*)^{-a} on [0, R], u*'(0) = 0,
/// u*(R) = boundary_value. Throws BracketFailed.
RadialProfile solve_radial_gauss(int n, const GaussRhs& rhs, double s, double boundary_value, double R = 1.0);
/// Main approximate problem: c = 1, p = (α-n-2)/2, a = α.
RadialProfile solve_radial_gauss(int n, double alpha, double s, double boundary_value);

/// σ_n/σ_{n-k}(λ) = coef·w*^{wp}(-u*)^{-up} with λ_rad = w*³u*'' and n-1 copies
/// of λ_tan = w*u*'/r on [0, r_ball]. Throws BracketFailed, NonElliptic.
RadialProfile solve_radial_quotient(int n, int k, const QuotientRhs& rhs, double r_ball, double boundary_value);
/// Main problem: coef = 1, wp = up = α.
RadialProfile solve_radial_quotient(int n, int k, double alpha, double r_ball, double boundary_value);

struct RadialComparison {
  double max_rel = 0.0;
  double l2_rel = 0.0;
  int worst_node = -1;
};

/// Relative deviation of a grid field from the profile at every node.
RadialComparison compare_with_grid(const RadialProfile& profile, const DualField& field);

}  // namespace expander
