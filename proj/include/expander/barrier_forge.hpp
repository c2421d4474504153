#pragma once

#include <optional>
#include <vector>

#include "expander/expander_solver.hpp"

namespace expander {

/// g₁(h) = -h·log|log h| and its h-derivatives, for 0 < h < 1.
double g1(double h);
double g1_d1(double h);
double g1_d2(double h);
/// Closed-form det D²g₁(h(ξ)) at |ξ| = r in dimension n.
double g1_det_closed_form(int n, double s, double r);

/// g₂ = |ξ|²/2 - (1-δ₀)/(2s) - δ₀·log|log δ₀| written in h = 1 - s|ξ|².
double g2(double h, double s, double delta0);

/// Rotationally symmetric profile Φ(h): g₁ below δ₀/2, g₂ above 2δ₀, and a
/// C² blend in between matching value, first and second derivatives at both
/// ends of the zone.
///
/// The blend has Φ'' = g₁''(δ₀/2)·(1-t)^p·(1 + c·t) ≥ 0 in t = (h-δ₀/2)/(3δ₀/2),
/// with (p, c) fixed by the two end conditions on Φ and Φ'. When no such pair
/// exists (Φ' would have to decrease, e.g. s = 1/2) the quintic Hermite blend
/// is used and is generally not convex.
class SuperPhi {
 public:
  SuperPhi(double s, double delta0);

  double s() const { return s_; }
  double delta0() const { return delta0_; }
  bool monotone_blend() const { return monotone_; }
  double value(double h) const;
  double d1(double h) const;
  double d2(double h) const;

  /// Value, radial slope |DΦ| and the two Hessian eigenvalues at |ξ| = r.
  double at_radius(double r) const { return value(1.0 - s_ * r * r); }
  double gradient_norm(double r) const;
  double hessian_radial(double r) const;
  double hessian_tangential(double r) const;

  /// Smallest radial and tangential eigenvalue over `samples` radii in the
  /// blend zone; both positive means the blend is convex.
  double blend_min_eigenvalue(int samples = 2001) const;

 private:
  void fit_monotone();

  double s_, delta0_;
  double lo_, hi_;
  bool monotone_ = false;
  double a_ = 0.0, p_ = 0.0, c_ = 0.0;
  double coef_[6];
};

struct BlowupSample {
  double s = 0.0;
  double h = 0.0;
  double gradient = 0.0;  // |D(ρΦ)| on the boundary circle of the s-problem
};

struct Supersolution {
  SuperPhi phi;
  double rho = 0.0;
  DualField field;                  // ρΦ at the grid nodes
  double blend_min_eigenvalue = 0.0;
  double max_operator_ratio = 0.0;  // max over interior nodes of det D²(ρΦ) / RHS bound
  std::vector<BlowupSample> certificate;
};

/// Largest ρ in [2⁻¹⁶, 2¹⁶] with det D²(ρΦ) ≤ h^{(α-n-2)/2}·M^{-α} at every
/// interior node, where M = `u_abs_max` bounds |u*|. Throws BadConstant for
/// δ₀ outside (0, 0.2] or s outside [1/2, 1); NoAdmissibleRho when even the
/// smallest ρ fails.
Supersolution build_supersolution(const ProblemSpec& spec, GridPtr grid, double s, double delta0,
                                  double u_abs_max);

/// Weighted gradient |D(ρΦ)| along h → 0 on the boundary circles of the
/// problems s = 1 - 10^{-j}, j = 1..levels.
std::vector<BlowupSample> blowup_certificate(double rho, double delta0, int levels = 12);

struct PsiBarrier {
  DualField field;
  double kcoef = 0.0;
  double gradient_bound = 0.0;  // max |Dψ| on the boundary ring
  int checked_nodes = 0;
  int violations = 0;           // nodes with det D²ψ ≤ (ks)²h^{-2}
  double min_det_ratio = 0.0;   // min det D²ψ / ((ks)² h^{-2})
};

/// ψ = -k√h + k√(1-s) + u₀* with k = 3/[min(-φ*)]^{α/n}. The subsolution
/// check runs on interior nodes with h ≥ `h_min`.
PsiBarrier boundary_barrier_psi(const ProblemSpec& spec, double s, const DualField& u0_star,
                                double h_min = 0.05);

struct TouchingBarrier {
  double theta0 = 0.0;
  double r = 0.0;
  double d = 0.0;
  double b1 = 0.0, b2 = 0.0;  // slopes in the frame rotated to θ₀
  std::vector<double> t;      // circle parameter, t = 0 at the touching point
  std::vector<double> F;      // barrier minus u* along the circle
  double min_F_off = 0.0;     // min of F over t ≠ 0
  double slope_gap = 0.0;     // ∂_ξ₁u* - ∂_ξ₁(barrier) at the touching point

  double value(const SuperPhi& phi, double rho, double x, double y) const;
};

/// Affine shift of ρΦ touching u* at r·(cos θ₀, sin θ₀) on the circle |ξ| = r.
/// Throws OutsideBall unless √((2-δ₀)/(2s)) < r < 1 and DominanceFailed when
/// F < 0 at some sampled t ≠ 0.
TouchingBarrier touching_barrier(const Supersolution& super, const DualField& u_star, double theta0, double r,
                                 double d, int samples = 256);

struct BarrierRun {
  ContinuationResult run;
  double constant = 0.0;  // K, C₁ or the Maclaurin constant, by context

  const DualField& last() const { return run.fields.back(); }
  /// Extrapolated limit if present, else the field at the largest parameter.
  const DualField& limit_or_last() const { return run.limit ? run.limit->field : run.fields.back(); }
};

/// det D²ū* = K⁻¹·h^{-(n+2)/2} for every s in the schedule; each ū*_s is a
/// subsolution of the s-problem. Throws BadConstant unless 0 < K ≤ C₀^α.
BarrierRun solve_ubar_star(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc,
                           const ContinuationSchedule& schedule, double K);
double default_K(const ProblemSpec& spec);

/// det D²u₀* = 1/C₁ with boundary φ*. Throws BadConstant unless
/// C₁ > (-min ū*)^α.
BarrierRun solve_u0_star(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc,
                         const ContinuationSchedule& schedule, double C1, double ubar_min);
double default_C1(const ProblemSpec& spec, double ubar_min);

/// Smallest nodal value over all fields of a run.
double run_min(const BarrierRun& run);

/// Gauss dual of σ_n(κ) = factor·(-v)^{α'} with α' = αn/k, i.e. RHS
/// factor⁻¹·h^{(α'-n-2)/2}(-u*)^{-α'}. Throws BadOrder unless k < n.
BarrierRun power_subsolution(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc,
                             const ContinuationSchedule& schedule, double sigma_factor);
/// factor = C(n,k)^{-n/k}: the Maclaurin subsolution of the quotient problem.
BarrierRun maclaurin_subsolution(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc,
                                 const ContinuationSchedule& schedule);

/// Quotient problem with RHS C₀^{-α} and boundary φ* on the unit ball.
DualField constant_sigma_k_supersolution(const ProblemSpec& spec, std::shared_ptr<const Discretization> unit_disc,
                                         const ContinuationSchedule& schedule, double C0);

/// Every barrier of one Gauss run, as consumed by the auditor.
struct GaussBarriers {
  BarrierRun ubar_star;
  BarrierRun u0_star;
  std::optional<Supersolution> super;
  std::optional<PsiBarrier> psi;
};

/// Every barrier of one quotient run.
struct QuotientBarriers {
  BarrierRun maclaurin;
  BarrierRun sub100;
  DualField const_super;
};

GaussBarriers build_gauss_barriers(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc,
                                   const ContinuationSchedule& schedule, double delta0);
QuotientBarriers build_quotient_barriers(const ProblemSpec& spec, std::shared_ptr<const Discretization> unit_disc,
                                         const ContinuationSchedule& schedule);

}  // namespace expander
