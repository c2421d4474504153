#pragma once

#include <optional>
#include <vector>

#include "expander/dual_geometry.hpp"
#include "expander/ma_operator.hpp"
#include "expander/problem_spec.hpp"

namespace expander {

struct NewtonOptions {
  double tol = 1e-9;
  int max_iters = 60;
  double damping_floor = 1.0 / 1024.0;
  double convexity_tol = 1e-6;
};

NewtonOptions newton_options(const ContinuationSchedule& schedule);

struct NewtonStepResult {
  std::vector<double> iterate;
  double damping = 1.0;
  ResidualVector residual;
};

/// One damped Newton update. The largest damping in {1, 1/2, …, floor} that
/// lowers the scaled residual and keeps u* < 0 is taken.
NewtonStepResult newton_step(const OperatorContext& ctx, const std::vector<double>& iterate,
                             const ResidualVector& residual, double damping_floor);

struct NewtonResult {
  std::vector<double> u;
  int iterations = 0;
  ResidualVector residual;
  std::vector<double> damping;
  // Some node stopped above tol but within the roundoff floor 8ε·Σ_q|J_pq||u_q|.
  bool roundoff_limited = false;
};

/// Iterates to max |R_i|/RHS_i ≤ tol, or until every node that misses tol is
/// within its roundoff floor. Boundary entries of `initial` are the Dirichlet
/// data. Throws NewtonDiverged, ConvexityLost.
NewtonResult newton_solve(const OperatorContext& ctx, std::vector<double> initial, const NewtonOptions& opts);

struct StepRecord {
  double param = 0.0;
  int iterations = 0;
  double residual_scaled = 0.0;
  double residual_l2 = 0.0;
  std::vector<double> damping;
  int substeps = 0;  // extra intermediate parameters inserted after a failure
  bool roundoff_limited = false;
  double wall_seconds = 0.0;
};

struct SolveTrace {
  std::vector<StepRecord> steps;
};

struct LimitField {
  DualField field;
  std::vector<double> error;  // |difference of the last two extrapolants|
  std::vector<unsigned char> non_monotone;
};

/// Nodewise linear extrapolation in (1 - param) from the last two fields.
/// All fields must share node numbering. Throws InsufficientData for fewer
/// than three fields.
LimitField extrapolate_to_limit(const std::vector<DualField>& fields, const std::vector<double>& params);

struct ContinuationResult {
  std::vector<DualField> fields;
  std::optional<LimitField> limit;
  SolveTrace trace;
};

/// Harmonic extension of φ* plus a convex quadratic vanishing on the boundary.
std::vector<double> dirichlet_initial_guess(const BallGrid& grid, const BoundaryData& phi);

/// Writes φ* = -φ into the boundary ring.
void impose_dual_boundary(const BallGrid& grid, const BoundaryData& phi, std::vector<double>& u);

/// Monge-Ampère family c·h^p·(-u*)^{-a} over increasing s, warm-started.
ContinuationResult continue_gauss(std::shared_ptr<const Discretization> disc, const BoundaryData& phi,
                                  const std::vector<double>& s_values, GaussRhs rhs, const NewtonOptions& opts,
                                  std::vector<double> initial);

/// Approximate Gauss problem with the main right-hand side; `initial`
/// defaults to the Dirichlet guess when absent.
ContinuationResult solve_gauss_dual(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc,
                                    const ContinuationSchedule& schedule,
                                    std::optional<std::vector<double>> initial = std::nullopt);

/// Quotient problem on B_r for every r in the schedule with Dirichlet data
/// taken from `boundary_source` (a field on B_1). The limit lives on the unit
/// grid with matching (n_r, n_theta), node (j, a) ↔ r·ξ_(j,a).
ContinuationResult solve_quotient_dual(const ProblemSpec& spec, const GridSpec& gs,
                                       const ContinuationSchedule& schedule, const DualField& boundary_source,
                                       QuotientRhs rhs);
ContinuationResult solve_quotient_dual(const ProblemSpec& spec, const GridSpec& gs,
                                       const ContinuationSchedule& schedule, const DualField& boundary_source);

}  // namespace expander
