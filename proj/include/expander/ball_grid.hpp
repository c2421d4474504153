#pragma once

#include <vector>

#include "expander/problem_spec.hpp"

namespace expander {

/// Polar node layout on a closed ball of given radius.
///
/// Node 0 is the center. Ring j (1..n_r) at angle index a (0..n_theta-1) is
/// node 1 + (j-1)·n_theta + a. Ring n_r is the Dirichlet boundary.
struct BallGrid {
  int n_r = 0;
  int n_theta = 0;
  double radius = 1.0;
  double grading = 1.0;
  int stencil_width = 8;
  std::vector<double> levels;  // n_r + 1 entries, levels[0] = 0, levels[n_r] = radius
  std::vector<double> angles;  // n_theta entries
  std::vector<double> x, y, rho, theta;
  std::vector<unsigned char> boundary;

  int node_count() const { return 1 + n_r * n_theta; }
  int interior_count() const { return 1 + (n_r - 1) * n_theta; }
  int index(int ring, int a) const {
    if (ring == 0) return 0;
    a %= n_theta;
    if (a < 0) a += n_theta;
    return 1 + (ring - 1) * n_theta + a;
  }
  int ring_of(int node) const { return node == 0 ? 0 : 1 + (node - 1) / n_theta; }
  int angle_of(int node) const { return node == 0 ? 0 : (node - 1) % n_theta; }
  double dtheta() const;

  /// Neighbor table of the polar stencil: (ring ± 1) × (angle ± 1) around an
  /// interior ring node, with the center standing in for ring 0.
  std::vector<int> neighbors(int node) const;
};

std::vector<double> radial_levels(int n_r, double grading, double radius);

/// Throws DegenerateGrid for n_r < 4, n_theta < 8, odd n_theta, or a radius
/// outside (0, 1].
BallGrid build_grid(const GridSpec& gs, double radius);

/// Grid coordinate t in [0, 1] of a radius, inverse of the grading map.
double grid_coordinate(const BallGrid& grid, double rho);

/// Samples a nodal field at polar position (rho, theta) with rho ≤ radius.
///
/// Four-point Lagrange along the diameter in the grid coordinate, then
/// four-point periodic Lagrange across angles.
double sample_polar(const BallGrid& grid, const std::vector<double>& values, double rho,
                    double theta);

/// Samples `values` (on `source`) at every node of `target`.
std::vector<double> resample(const BallGrid& source, const std::vector<double>& values,
                             const BallGrid& target);

}  // namespace expander
