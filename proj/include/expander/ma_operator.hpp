#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "expander/dual_geometry.hpp"
#include "expander/polar_stencil.hpp"
#include "expander/wide_stencil.hpp"

namespace expander {

enum class Scheme { polar, monotone };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme scheme);

/// Right-hand side c·h^p·(-u*)^{-a} of a Monge-Ampère Dirichlet problem,
/// h = 1 - s|ξ|².
struct GaussRhs {
  double c = 1.0;
  double p = 0.0;
  double a = 0.0;
};

/// Right-hand side coef·w*^wp·(-u*)^{-up} of a Hessian-quotient problem.
struct QuotientRhs {
  double coef = 1.0;
  double wp = 0.0;
  double up = 0.0;
};

/// Shared discretization data for one grid.
struct Discretization {
  GridPtr grid;
  std::shared_ptr<const PolarStencil> stencil;
  std::shared_ptr<const WideStencil> wide;  // only for the monotone scheme
  Scheme scheme = Scheme::polar;
  std::vector<double> cc, cs2, ss;  // direction pair table

  kernels::PairTable pairs() const { return {static_cast<int>(cc.size()), cc.data(), cs2.data(), ss.data()}; }
};

std::shared_ptr<const Discretization> make_discretization(GridPtr grid, Scheme scheme = Scheme::polar);

struct OperatorContext {
  std::shared_ptr<const Discretization> disc;
  CaseTag kind = CaseTag::gauss;
  int k = 2;                 // quotient order (n = 2)
  double s = 0.0;            // Gauss approximation parameter
  GaussRhs gauss;
  QuotientRhs quotient;
  std::vector<double> h;     // 1 - s|ξ|² per node
  std::vector<double> w;     // sqrt(1 - |ξ|²) per node

  const BallGrid& grid() const { return *disc->grid; }
};

/// Main approximate Gauss problem: c = 1, p = (α-n-2)/2, a = α.
GaussRhs gauss_rhs_for(const ProblemSpec& spec);
OperatorContext make_gauss_context(std::shared_ptr<const Discretization> disc, double s, GaussRhs rhs);
/// Main quotient problem: coef = 1, wp = up = α.
QuotientRhs quotient_rhs_for(const ProblemSpec& spec);
OperatorContext make_quotient_context(std::shared_ptr<const Discretization> disc, int k, QuotientRhs rhs);

/// Operator values and their partial derivatives with respect to the local
/// Hessian entries at every interior node.
struct OperatorEval {
  LocalHessian H;
  std::vector<double> op;
  std::vector<double> drr, drt, dtt;
  std::vector<int> active;
  std::vector<double> dA, dB;  // monotone scheme: weights of the active pair forms
};

/// Throws NonEllipticPoint (quotient) with the node location.
OperatorEval evaluate_operator(const OperatorContext& ctx, const std::vector<double>& u);

double det_hessian_ws(const OperatorContext& ctx, const std::vector<double>& u, int node);

/// σ_n(λ)/σ_{n-k}(λ); throws NonEllipticPoint when some λ_i ≤ 0.
double sigma_quotient(const std::vector<double>& lambda, int k);

double dual_rhs_gauss(const OperatorContext& ctx, double u_star, int node);
double dual_rhs_quotient(const OperatorContext& ctx, double u_star, int node);
double dual_rhs(const OperatorContext& ctx, double u_star, int node);
double dual_rhs_du(const OperatorContext& ctx, double u_star, int node);

struct ResidualVector {
  std::vector<double> values;  // per node; boundary entries 0
  double max_abs = 0.0;
  double l2 = 0.0;
  double max_scaled = 0.0;  // max |R_i| / RHS_i
  int worst_node = -1;
};

ResidualVector assemble_residual(const OperatorContext& ctx, const std::vector<double>& u);
ResidualVector residual_from_eval(const OperatorContext& ctx, const std::vector<double>& u,
                                  const OperatorEval& ev);

/// Directional derivative of the residual; the perturbation covers all nodes.
ResidualVector assemble_jacobian_action(const OperatorContext& ctx, const std::vector<double>& u,
                                        const std::vector<double>& perturbation);

/// Jacobian restricted to interior unknowns (node index = unknown index).
Eigen::SparseMatrix<double> assemble_jacobian(const OperatorContext& ctx, const std::vector<double>& u,
                                              const OperatorEval& ev);

}  // namespace expander
