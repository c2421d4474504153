#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "expander/ball_grid.hpp"
#include "expander/polar_stencil.hpp"
#include "expander/problem_spec.hpp"

namespace expander {

using GridPtr = std::shared_ptr<const BallGrid>;

/// Sampled dual potential u* on a ball grid.
struct DualField {
  GridPtr grid;
  std::vector<double> values;
  double param = 0.0;  // s (Gauss) or r (quotient)

  std::vector<double> boundary_trace() const;
};

/// Entire graph samples reconstructed from a dual field.
struct PrimalSurface {
  std::vector<double> x, y;
  std::vector<double> u;
  std::vector<double> dux, duy;
  std::vector<std::array<double, 3>> normal;  // timelike unit normal (Du, 1)/sqrt(1-|Du|²)
  std::vector<std::array<double, 2>> kappa;   // principal curvatures, ascending radii order
  std::vector<double> v;                      // support ⟨X, ν⟩
  std::vector<double> xi_norm;                // |ξ| of the maximizing dual node
  std::vector<int> dual_node;
  std::vector<unsigned char> boundary_supported;

  std::size_t size() const { return x.size(); }
};

double w_star(double x, double y);

/// γ*_{ij} = δ_ij - ξ_iξ_j/(1+w*); throws OutsideBall for |ξ| ≥ 1.
Eigen::Matrix2d eval_gamma_star(const Eigen::Vector2d& xi);

/// Elementary symmetric polynomial σ_k, with σ_0 = 1.
double sigma_k(const std::vector<double>& lambda, int k);

/// Eigenvalues (ascending) of w*·γ*·H·γ* for a Hessian given in the local
/// polar frame (radial, tangential) at a point with weight w*.
std::array<double, 2> radii_from_local_hessian(double w, double hrr, double hrt, double htt);

/// Pointwise geometry of one dual field with a cached finite-difference
/// Hessian and gradient.
class FieldGeometry {
 public:
  explicit FieldGeometry(const DualField& field);
  FieldGeometry(const DualField& field, std::shared_ptr<const PolarStencil> stencil);

  const DualField& field() const { return field_; }
  const LocalHessian& hessian() const { return hessian_; }
  const std::vector<std::array<double, 2>>& gradient() const { return gradient_; }

  /// Curvature radii at an interior node; throws SingularHessian if an
  /// eigenvalue is ≤ 0.
  std::array<double, 2> curvature_radii(int node) const;
  double support_v(int node) const;
  /// Smallest pure second difference over the stencil directions at a node.
  double min_second_difference(int node) const;

 private:
  DualField field_;
  std::shared_ptr<const PolarStencil> stencil_;
  LocalHessian hessian_;
  std::vector<std::array<double, 2>> gradient_;
};

std::array<double, 2> curvature_radii(const DualField& field, int node);

/// v = u*(ξ)/w*(ξ); throws OutsideBall for |ξ| ≥ 1.
double support_v(double u_star, double x, double y);

/// Throws NonConvexInput when some pure second difference at an interior node
/// falls below -tol·(1 + |tr H|).
void require_discrete_convexity(const FieldGeometry& geo, double tol);

/// Discrete Legendre transform u(x) = max over nodes of x·ξ - u*(ξ).
///
/// Ties within 1e-12 go to the node of smallest |ξ|, then smallest index.
/// With `boundary` on a unit-ball field the Dirichlet circle enters as the
/// continuum max over θ of x·θ - φ*(θ) instead of its ring nodes alone.
PrimalSurface legendre_transform(const DualField& field, const std::vector<double>& xs,
                                 const std::vector<double>& ys, double convexity_tol = 1e-6,
                                 const BoundaryData* boundary = nullptr);

/// Polar tensor samples: every radius in `radii` at n_angles equispaced angles
/// (the origin is emitted once).
void polar_samples(const std::vector<double>& radii, int n_angles, std::vector<double>& xs,
                   std::vector<double>& ys);

/// σ_k(κ) - (-v)^α per sample; boundary-supported samples carry NaN.
std::vector<double> primal_residual(const PrimalSurface& surface, const ProblemSpec& spec);

}  // namespace expander
