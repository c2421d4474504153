#pragma once

#include <string>
#include <vector>

#include "expander/error.hpp"

namespace expander {

/// One term a·cos(m·θ + ψ) of the boundary asymptotics.
struct CosineTerm {
  int frequency = 0;
  double amplitude = 0.0;
  double phase = 0.0;
};

/// Asymptotic profile φ on the circle: u(x) - |x| -> φ(x/|x|).
///
/// Restricted to a finite cosine series so that φ and its first two angular
/// derivatives are exact.
struct BoundaryData {
  enum class Mode { constant, cosine_series };

  Mode mode = Mode::constant;
  double c0 = 1.0;
  std::vector<CosineTerm> terms;

  double value(double theta) const;
  double d_theta(double theta) const;
  double d2_theta(double theta) const;
  /// Dirichlet value of the dual potential, φ* = -φ.
  double dual(double theta) const { return -value(theta); }

  /// Minimum and maximum of φ sampled on `samples` equispaced angles.
  double sampled_min(int samples = 4096) const;
  double sampled_max(int samples = 4096) const;
  /// Σ |a_m| m², a bound for the second angular derivative.
  double curvature_bound() const;
};

double eval_phi(const BoundaryData& phi, double theta);

enum class CaseTag { gauss, quotient };

struct ProblemSpec {
  int n = 2;
  int k = 2;
  double alpha = 1.0;
  BoundaryData phi;

  CaseTag case_tag() const { return k == n ? CaseTag::gauss : CaseTag::quotient; }
  /// C₀ > 0 with -C₀ = max φ*.
  double c0_bound() const { return phi.sampled_min(); }
};

struct GridSpec {
  int n_r = 64;
  int n_theta = 128;
  double grading_exponent = 2.0;
  int stencil_width = 8;
};

struct ContinuationSchedule {
  std::vector<double> s_values{0.5, 0.75, 0.9, 0.96, 0.99, 0.997, 0.999};
  std::vector<double> r_values{0.5, 0.75, 0.9, 0.96, 0.99};
  double newton_tol = 1e-9;
  int max_newton_iters = 60;
  double damping_floor = 1.0 / 1024.0;
};

struct Violation {
  ErrorCode code;
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ErrorCode code) const;
  std::string summary() const;
};

ValidationResult validate_spec(const ProblemSpec& spec);
ValidationResult validate_schedule(const ContinuationSchedule& schedule);

/// Throws ValidationError carrying the summary when the spec is rejected.
void require_valid(const ProblemSpec& spec);

double binomial(int n, int k);

}  // namespace expander
