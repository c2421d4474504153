#pragma once

#include <string>
#include <utility>
#include <vector>

#include "expander/barrier_forge.hpp"
#include "expander/dual_geometry.hpp"

namespace expander {

/// Outcome of one audit. Failures are recorded, never thrown.
struct CheckRecord {
  std::string name;
  std::string anchor;  // the estimate being audited, in words
  std::vector<std::pair<std::string, double>> quantities;
  double threshold = 0.0;
  std::string threshold_rule;
  bool passed = false;
  int worst_node = -1;
  double worst_x = 0.0, worst_y = 0.0;
  std::string note;

  void add(const std::string& key, double value) { quantities.emplace_back(key, value); }
  double get(const std::string& key) const;
};

struct EstimateReport {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<CheckRecord> records;  // sorted by name
  std::vector<std::string> failures;
  bool passed = true;
};

/// Sorts by name and lists failures in that order. Throws ValidationError for
/// an empty record list or a repeated name.
EstimateReport emit_report(std::vector<CheckRecord> records,
                           std::vector<std::pair<std::string, std::string>> metadata);

/// (max - min)/max of a list of positive maxima.
double relative_variation(const std::vector<double>& values);

struct PogorelovDualQuantity {
  double m_alpha = 0.0;  // (n-2+α)/(2n)
  double beta = 0.0;     // 8/m_α
  double m0 = 0.0;       // strict bound for h²|Du*|² and h⁴|Du*|²
  double N = 1.0;
  double M = 0.0;        // 13·m0 + N
};

PogorelovDualQuantity make_pogorelov_dual(int n, double alpha);
double m_alpha(int n, double alpha);

/// Gauss: ū*_s ≤ u_s ≤ min(u₀*, -C₀) for every s, nodewise with slack 1e-10.
/// `ubar` and `fields` are matched by position.
CheckRecord check_c0_sandwich(const std::vector<DualField>& fields, const std::vector<DualField>& ubar,
                              const DualField* u0_star, double c0, double slack = 1e-10);

/// Quotient: const_super < u_r < maclaurin on B_r for every r; both barriers
/// live on the unit ball and are resampled.
CheckRecord check_c0_sandwich_quotient(const std::vector<DualField>& fields, const DualField& const_super,
                                       const DualField& maclaurin, double slack = 1e-10);

/// max h·|Du*| and max h·|Du*|·e^{-u*²} per field; passes when the unweighted
/// maximum varies by at most `tol` over the last three fields.
CheckRecord check_gradient_upper(const std::vector<DualField>& fields, double tol = 0.15);

/// min |Du*|/log|log h| over {h < δ₁}, radial monotonicity of |Du*| there, and
/// the ratio of |Du*| on the outermost interior ring to its value at h = 0.2.
CheckRecord check_gradient_lower(const DualField& field, double delta1, double c_audit = 0.0,
                                 double blowup_ratio = 5.0);

/// Least-squares slope of log η against log h over {η > 0, h < h_max}.
CheckRecord check_eta_exponent(const DualField& field, const DualField& u0_star, double m_alpha,
                               double h_max = 0.2, double margin = 0.1);

/// max over interior nodes and stencil directions of η^β·u*_ζζ and of the
/// test value η^β·u*_ζζ/(1 - g/M) per field; passes when the first varies by
/// at most `tol` over the last three fields.
CheckRecord check_pogorelov_dual(const std::vector<DualField>& fields, const DualField& u0_star,
                                 const PogorelovDualQuantity& q, double tol = 0.15);

/// max over {u ≤ c} of (c - u)·κ_max for c ∈ {2, 4, 8}·min u on a coarse and a
/// fine reconstruction; passes when every maximum is finite and changes by
/// at most `tol` under refinement.
CheckRecord check_primal_pogorelov(const PrimalSurface& coarse, const PrimalSurface& fine, double tol = 0.2);

/// The gradient bound on {u > Ψ}, Ψ = u̲₁ + δ with δ half the smallest gap
/// u̲ - u̲₁, plus the dual ordering of the two subsolutions and the radius of
/// the set {Ψ ≤ ū}.
CheckRecord check_gradient_estimate_bp(const PrimalSurface& u, const PrimalSurface& upper,
                                       const PrimalSurface& sub, const PrimalSurface& sub1,
                                       const DualField& sub_dual, const DualField& sub1_dual);

/// σ_n/σ_{n-k}(λ) against (-v)^{-α} at interior nodes, and the largest λ in the
/// interior against the outermost interior ring.
CheckRecord check_quotient_residual_hyperbolic(const DualField& field, const ProblemSpec& spec,
                                               double tol = 5e-3, double lambda_slack = 0.05);

/// |Du| ≤ 1 - 10⁻⁶, κ > 0, Maclaurin's inequality and |σ_k(κ) - (-v)^α| ≤ tol
/// where the dual point has |ξ| ≤ xi_max. Boundary-supported samples are
/// skipped.
CheckRecord check_primal_certificate(const PrimalSurface& surface, const ProblemSpec& spec,
                                     double xi_max = 0.9, double tol = 5e-3);

/// α·w*^α·(-u*)^{-α-1} > 0 at every interior node of every field.
CheckRecord check_rhs_monotonicity(const std::vector<DualField>& fields, const ProblemSpec& spec);

/// Boundary barrier and supersolution diagnostics of a Gauss run.
CheckRecord check_psi_barrier(const PsiBarrier& psi);
CheckRecord check_supersolution(const Supersolution& super);

}  // namespace expander
