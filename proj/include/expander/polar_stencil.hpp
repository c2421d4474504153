#pragma once

#include <array>
#include <vector>

#include "expander/ball_grid.hpp"
#include "expander/kernels.hpp"

namespace expander {

/// Second derivatives in the local frame of each node: radial/tangential on
/// rings, Cartesian (x, y) at the center. Boundary entries are zero.
struct LocalHessian {
  std::vector<double> hrr, hrt, htt;
};

struct StencilTerm {
  int node;
  double crr, crt, ctt;
};

/// Second-order finite-difference Hessian on the polar grid, as a ring
/// kernel for evaluation and as an explicit linear table for Jacobians.
class PolarStencil {
 public:
  explicit PolarStencil(const BallGrid& grid);

  const BallGrid& grid() const { return grid_; }

  LocalHessian hessian(const std::vector<double>& u) const;

  /// Reference evaluation at one interior node from the linear table.
  std::array<double, 3> hessian_at(const std::vector<double>& u, int node) const;

  /// Linear stencil of (Hrr, Hrt, Htt) at an interior node.
  const StencilTerm* terms_begin(int node) const { return terms_.data() + offsets_[node]; }
  const StencilTerm* terms_end(int node) const { return terms_.data() + offsets_[node + 1]; }

  /// Cartesian gradient at every node; boundary rings use one-sided radial
  /// differences.
  std::vector<std::array<double, 2>> gradient(const std::vector<double>& u) const;

  const kernels::RingCoeffs& ring(int j) const { return rings_[j]; }

 private:
  BallGrid grid_;
  std::vector<kernels::RingCoeffs> rings_;  // indexed by ring, valid for 1..n_r-1
  std::vector<int> offsets_;
  std::vector<StencilTerm> terms_;
};

/// Angle of the local radial direction at a node (0 at the center).
inline double frame_angle(const BallGrid& g, int node) { return node == 0 ? 0.0 : g.theta[node]; }

/// Rotates a local-frame Hessian into Cartesian components (xx, xy, yy).
std::array<double, 3> to_cartesian(double frame, double hrr, double hrt, double htt);

/// e^T H e for a unit vector at angle psi measured in the same frame as H.
double directional_second(double psi, double hrr, double hrt, double htt);

}  // namespace expander
