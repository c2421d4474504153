#include "expander/barrier_forge.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace expander {

double g1(double h) { return -h * std::log(std::abs(std::log(h))); }

double g1_d1(double h) {
  const double l = std::abs(std::log(h));
  return -std::log(l) + 1.0 / l;
}

double g1_d2(double h) {
  const double l = std::abs(std::log(h));
  return (1.0 + 1.0 / l) / (h * l);
}

double g1_det_closed_form(int n, double s, double r) {
  const double h = 1.0 - s * r * r;
  const double l = std::abs(std::log(h));
  const double t = 2.0 * std::log(l) - 2.0 / l;
  return std::pow(s, n) * std::pow(t, n - 1) * (t + 4.0 * s * r * r * (1.0 + 1.0 / l) / (h * l));
}

double g2(double h, double s, double delta0) {
  return (delta0 - h) / (2.0 * s) - delta0 * std::log(std::abs(std::log(delta0)));
}

SuperPhi::SuperPhi(double s, double delta0) : s_(s), delta0_(delta0), lo_(0.5 * delta0), hi_(2.0 * delta0) {
  // P(t) = Σ c_i t^i on t = (h - lo)/L, matched to g₁ at t = 0 and g₂ at t = 1.
  const double L = hi_ - lo_;
  const double f0 = g1(lo_), f0p = g1_d1(lo_) * L, f0pp = g1_d2(lo_) * L * L;
  const double f1 = g2(hi_, s, delta0), f1p = -L / (2.0 * s), f1pp = 0.0;
  Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> b;
  A(0, 0) = 1.0;
  A(1, 1) = 1.0;
  A(2, 2) = 2.0;
  for (int i = 0; i < 6; ++i) {
    A(3, i) = 1.0;
    A(4, i) = i;
    A(5, i) = i * (i - 1.0);
  }
  b << f0, f0p, f0pp, f1, f1p, f1pp;
  const Eigen::Matrix<double, 6, 1> c = A.fullPivLu().solve(b);
  for (int i = 0; i < 6; ++i) coef_[i] = c[i];
  fit_monotone();
}

namespace {

// Integrals of (1-u)^p and u(1-u)^p over [0, t], and their integrals again.
double J0(double p, double t) { return (1.0 - std::pow(1.0 - t, p + 1.0)) / (p + 1.0); }
double J1(double p, double t) { return J0(p, t) - (1.0 - std::pow(1.0 - t, p + 2.0)) / (p + 2.0); }
double K0(double p, double t) { return (t - (1.0 - std::pow(1.0 - t, p + 2.0)) / (p + 2.0)) / (p + 1.0); }
double K1(double p, double t) {
  return K0(p, t) - (t - (1.0 - std::pow(1.0 - t, p + 3.0)) / (p + 3.0)) / (p + 2.0);
}

}  // namespace

void SuperPhi::fit_monotone() {
  const double L = hi_ - lo_;
  const double a = g1_d2(lo_);
  const double I0 = -1.0 / (2.0 * s_) - g1_d1(lo_);
  const double I1 = g2(hi_, s_, delta0_) - g1(lo_) - g1_d1(lo_) * L;
  if (!(I0 > 0.0)) return;
  // Φ'' = (1-t)^p (a + C t); C from the slope condition, p from the value condition.
  auto C = [&](double p) { return (I0 / L - a / (p + 1.0)) * (p + 1.0) * (p + 2.0); };
  auto f = [&](double p) { return I1 - L * L * (a / (p + 2.0) + C(p) / ((p + 2.0) * (p + 3.0))); };
  double p0 = 0.01, f0 = f(p0);
  for (int i = 0; i < 200; ++i) {
    const double p1 = p0 * 1.1, f1 = f(p1);
    if (f0 * f1 < 0.0) {
      double lo = p0, hi = p1, flo = f0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi), fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const double p = 0.5 * (lo + hi);
      if (C(p) >= -a) {
        monotone_ = true;
        a_ = a;
        p_ = p;
        c_ = C(p);
        return;
      }
    }
    p0 = p1;
    f0 = f1;
  }
}

double SuperPhi::value(double h) const {
  if (h < lo_) return g1(h);
  if (h > hi_) return g2(h, s_, delta0_);
  const double L = hi_ - lo_;
  const double t = (h - lo_) / L;
  if (monotone_) return g1(lo_) + g1_d1(lo_) * L * t + L * L * (a_ * K0(p_, t) + c_ * K1(p_, t));
  double v = 0.0;
  for (int i = 5; i >= 0; --i) v = v * t + coef_[i];
  return v;
}

double SuperPhi::d1(double h) const {
  if (h < lo_) return g1_d1(h);
  if (h > hi_) return -1.0 / (2.0 * s_);
  const double L = hi_ - lo_;
  const double t = (h - lo_) / L;
  if (monotone_) return g1_d1(lo_) + L * (a_ * J0(p_, t) + c_ * J1(p_, t));
  double v = 0.0;
  for (int i = 5; i >= 1; --i) v = v * t + i * coef_[i];
  return v / L;
}

double SuperPhi::d2(double h) const {
  if (h < lo_) return g1_d2(h);
  if (h > hi_) return 0.0;
  const double L = hi_ - lo_;
  const double t = (h - lo_) / L;
  if (monotone_) return std::pow(1.0 - t, p_) * (a_ + c_ * t);
  double v = 0.0;
  for (int i = 5; i >= 2; --i) v = v * t + i * (i - 1.0) * coef_[i];
  return v / (L * L);
}

double SuperPhi::gradient_norm(double r) const { return std::abs(d1(1.0 - s_ * r * r)) * 2.0 * s_ * r; }

double SuperPhi::hessian_radial(double r) const {
  const double h = 1.0 - s_ * r * r;
  return 4.0 * s_ * s_ * r * r * d2(h) - 2.0 * s_ * d1(h);
}

double SuperPhi::hessian_tangential(double r) const { return -2.0 * s_ * d1(1.0 - s_ * r * r); }

double SuperPhi::blend_min_eigenvalue(int samples) const {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double h = lo_ + (hi_ - lo_) * i / (samples - 1.0);
    const double r = std::sqrt((1.0 - h) / s_);
    m = std::min({m, hessian_radial(r), hessian_tangential(r)});
  }
  return m;
}

namespace {

// max over interior nodes of det D²(ρΦ) / (h^p·M^{-α}).
double operator_ratio(const OperatorContext& ctx, const std::vector<double>& v, const std::vector<double>& bound) {
  const OperatorEval ev = evaluate_operator(ctx, v);
  double m = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < ctx.grid().interior_count(); ++p) m = std::max(m, ev.op[p] / bound[p]);
  return m;
}

}  // namespace

Supersolution build_supersolution(const ProblemSpec& spec, GridPtr grid, double s, double delta0,
                                  double u_abs_max) {
  if (!(delta0 > 0.0 && delta0 <= 0.2)) {
    std::ostringstream os;
    os << "delta0=" << delta0 << " outside (0, 0.2]";
    throw Error(ErrorCode::BadConstant, os.str());
  }
  if (!(s >= 0.5 && s < 1.0)) {
    std::ostringstream os;
    os << "s=" << s << " outside [1/2, 1)";
    throw Error(ErrorCode::BadConstant, os.str());
  }
  Supersolution out{SuperPhi(s, delta0), 0.0, DualField{grid, {}, s}, 0.0, 0.0, {}};
  const BallGrid& g = *grid;
  std::vector<double> phi(g.node_count());
  for (int p = 0; p < g.node_count(); ++p) phi[p] = out.phi.value(1.0 - s * g.rho[p] * g.rho[p]);

  auto disc = make_discretization(grid, Scheme::polar);
  const auto ctx = make_gauss_context(disc, s, gauss_rhs_for(spec));
  const double pexp = (spec.alpha - spec.n - 2.0) / 2.0;
  std::vector<double> bound(g.interior_count());
  for (int p = 0; p < g.interior_count(); ++p) bound[p] = std::pow(ctx.h[p], pexp) * std::pow(u_abs_max, -spec.alpha);

  auto scaled = [&](double rho) {
    std::vector<double> v(phi);
    for (double& x : v) x *= rho;
    return v;
  };
  auto admissible = [&](double log2rho) { return operator_ratio(ctx, scaled(std::exp2(log2rho)), bound) <= 1.0; };

  double lo = -16.0, hi = 16.0;
  if (!admissible(lo)) {
    std::ostringstream os;
    os << "rho=2^-16 violates the supersolution inequality (s=" << s << ", M=" << u_abs_max << ")";
    throw Error(ErrorCode::NoAdmissibleRho, os.str());
  }
  if (admissible(hi)) {
    lo = hi;
  } else {
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (admissible(mid) ? lo : hi) = mid;
    }
  }
  out.rho = std::exp2(lo);
  out.field.values = scaled(out.rho);
  out.max_operator_ratio = operator_ratio(ctx, out.field.values, bound);
  out.blend_min_eigenvalue = out.phi.blend_min_eigenvalue();
  out.certificate = blowup_certificate(out.rho, delta0);
  return out;
}

std::vector<BlowupSample> blowup_certificate(double rho, double delta0, int levels) {
  std::vector<BlowupSample> out;
  for (int j = 1; j <= levels; ++j) {
    const double h = std::pow(10.0, -j);
    const double s = 1.0 - h;
    const SuperPhi phi(s, delta0);
    out.push_back({s, h, rho * phi.gradient_norm(1.0)});
  }
  return out;
}

namespace {

double det_at(const LocalHessian& H, int p) { return H.hrr[p] * H.htt[p] - H.hrt[p] * H.hrt[p]; }

}  // namespace

PsiBarrier boundary_barrier_psi(const ProblemSpec& spec, double s, const DualField& u0_star, double h_min) {
  const BallGrid& g = *u0_star.grid;
  PsiBarrier out;
  out.kcoef = 3.0 / std::pow(spec.c0_bound(), spec.alpha / spec.n);
  const double k = out.kcoef;
  out.field = DualField{u0_star.grid, std::vector<double>(g.node_count()), s};
  for (int p = 0; p < g.node_count(); ++p) {
    const double h = std::max(0.0, 1.0 - s * g.rho[p] * g.rho[p]);
    out.field.values[p] = -k * std::sqrt(h) + k * std::sqrt(1.0 - s) + u0_star.values[p];
  }
  const PolarStencil stencil(g);
  const auto grad = stencil.gradient(out.field.values);
  for (int a = 0; a < g.n_theta; ++a) {
    const int q = g.index(g.n_r, a);
    out.gradient_bound = std::max(out.gradient_bound, std::hypot(grad[q][0], grad[q][1]));
  }
  const LocalHessian H = stencil.hessian(out.field.values);
  out.min_det_ratio = std::numeric_limits<double>::infinity();
  for (int p = 0; p < g.interior_count(); ++p) {
    const double h = 1.0 - s * g.rho[p] * g.rho[p];
    if (h < h_min) continue;
    const double lower = (k * s) * (k * s) / (h * h);
    const double ratio = det_at(H, p) / lower;
    ++out.checked_nodes;
    if (!(ratio > 1.0)) ++out.violations;
    out.min_det_ratio = std::min(out.min_det_ratio, ratio);
  }
  return out;
}

double TouchingBarrier::value(const SuperPhi& phi, double rho, double x, double y) const {
  const double c = std::cos(theta0), sn = std::sin(theta0);
  const double x1 = c * x + sn * y, x2 = -sn * x + c * y;
  return rho * phi.value(1.0 - phi.s() * (x * x + y * y)) + b1 * x1 + b2 * x2 + d;
}

TouchingBarrier touching_barrier(const Supersolution& super, const DualField& u_star, double theta0, double r,
                                 double d, int samples) {
  const double s = super.phi.s();
  const double r_min = std::sqrt((2.0 - super.phi.delta0()) / (2.0 * s));
  const BallGrid& g = *u_star.grid;
  if (!(r > r_min && r < std::min(1.0, g.radius))) {
    std::ostringstream os;
    os << "touching radius " << r << " outside (" << r_min << ", 1)";
    throw Error(ErrorCode::OutsideBall, os.str());
  }
  auto u_at = [&](double rr, double th) { return sample_polar(g, u_star.values, rr, th); };
  TouchingBarrier T;
  T.theta0 = theta0;
  T.r = r;
  T.d = d;
  const double eps = 1e-6;
  const double ubar_r = super.rho * super.phi.at_radius(r);
  const double u0 = u_at(r, theta0);
  T.b2 = (u_at(r, theta0 + eps) - u_at(r, theta0 - eps)) / (2.0 * eps * r);
  T.b1 = (u0 - ubar_r - d) / r;
  const double du_r = (u_at(r + eps, theta0) - u_at(r - eps, theta0)) / (2.0 * eps);
  const double dbar_r = -super.rho * super.phi.d1(1.0 - s * r * r) * 2.0 * s * r;
  T.slope_gap = du_r - (dbar_r + T.b1);

  T.min_F_off = std::numeric_limits<double>::infinity();
  int worst = -1;
  for (int i = 0; i < samples; ++i) {
    const double t = -std::numbers::pi + 2.0 * std::numbers::pi * i / samples;
    const double F = ubar_r + T.b1 * r * std::cos(t) + T.b2 * r * std::sin(t) + d - u_at(r, theta0 + t);
    T.t.push_back(t);
    T.F.push_back(t == 0.0 ? 0.0 : F);
    if (t != 0.0 && F < T.min_F_off) {
      T.min_F_off = F;
      worst = i;
    }
  }
  if (T.min_F_off < -1e-10 * (1.0 + std::abs(u0))) {
    const double th = theta0 + T.t[worst];
    std::ostringstream os;
    os << "F=" << T.min_F_off << " at t=" << T.t[worst] << " (" << r * std::cos(th) << ", " << r * std::sin(th)
       << "), d=" << d;
    throw Error(ErrorCode::DominanceFailed, os.str());
  }
  return T;
}

double default_K(const ProblemSpec& spec) { return std::pow(spec.c0_bound(), spec.alpha); }

BarrierRun solve_ubar_star(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc,
                           const ContinuationSchedule& schedule, double K) {
  require_valid(spec);
  const double Kmax = default_K(spec);
  if (!(K > 0.0 && K <= Kmax * (1.0 + 1e-12))) {
    std::ostringstream os;
    os << "K=" << K << " outside (0, C0^alpha=" << Kmax << "]";
    throw Error(ErrorCode::BadConstant, os.str());
  }
  const GaussRhs rhs{1.0 / K, -(spec.n + 2.0) / 2.0, 0.0};
  BarrierRun out;
  out.constant = K;
  out.run = continue_gauss(disc, spec.phi, schedule.s_values, rhs, newton_options(schedule),
                           dirichlet_initial_guess(*disc->grid, spec.phi));
  return out;
}

double default_C1(const ProblemSpec& spec, double ubar_min) { return 2.0 * std::pow(-ubar_min, spec.alpha); }

BarrierRun solve_u0_star(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc,
                         const ContinuationSchedule& schedule, double C1, double ubar_min) {
  require_valid(spec);
  const double lower = std::pow(-ubar_min, spec.alpha);
  if (!(C1 > lower)) {
    std::ostringstream os;
    os << "C1=" << C1 << " must exceed (-min ubar*)^alpha=" << lower;
    throw Error(ErrorCode::BadConstant, os.str());
  }
  BarrierRun out;
  out.constant = C1;
  out.run = continue_gauss(disc, spec.phi, {schedule.s_values.front()}, GaussRhs{1.0 / C1, 0.0, 0.0},
                           newton_options(schedule), dirichlet_initial_guess(*disc->grid, spec.phi));
  return out;
}

double run_min(const BarrierRun& run) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& f : run.run.fields) m = std::min(m, *std::min_element(f.values.begin(), f.values.end()));
  if (run.run.limit) {
    const auto& v = run.run.limit->field.values;
    m = std::min(m, *std::min_element(v.begin(), v.end()));
  }
  return m;
}

BarrierRun power_subsolution(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc,
                             const ContinuationSchedule& schedule, double sigma_factor) {
  require_valid(spec);
  if (!(spec.k < spec.n)) throw Error(ErrorCode::BadOrder, "subsolution needs k < n");
  const double ap = spec.alpha * spec.n / spec.k;
  const GaussRhs rhs{1.0 / sigma_factor, (ap - spec.n - 2.0) / 2.0, ap};
  BarrierRun out;
  out.constant = sigma_factor;
  out.run = continue_gauss(disc, spec.phi, schedule.s_values, rhs, newton_options(schedule),
                           dirichlet_initial_guess(*disc->grid, spec.phi));
  return out;
}

BarrierRun maclaurin_subsolution(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc,
                                 const ContinuationSchedule& schedule) {
  const double factor = std::pow(binomial(spec.n, spec.k), -static_cast<double>(spec.n) / spec.k);
  return power_subsolution(spec, disc, schedule, factor);
}

DualField constant_sigma_k_supersolution(const ProblemSpec& spec, std::shared_ptr<const Discretization> unit_disc,
                                         const ContinuationSchedule& schedule, double C0) {
  require_valid(spec);
  if (!(C0 > 0.0)) throw Error(ErrorCode::BadConstant, "C0 must be positive");
  const QuotientRhs rhs{std::pow(C0, -spec.alpha), 0.0, 0.0};
  const auto ctx = make_quotient_context(unit_disc, spec.k, rhs);
  auto res = newton_solve(ctx, dirichlet_initial_guess(*unit_disc->grid, spec.phi), newton_options(schedule));
  return DualField{unit_disc->grid, std::move(res.u), 1.0};
}

GaussBarriers build_gauss_barriers(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc,
                                   const ContinuationSchedule& schedule, double delta0) {
  GaussBarriers B{solve_ubar_star(spec, disc, schedule, default_K(spec)), {}, std::nullopt, std::nullopt};
  const double umin = run_min(B.ubar_star);
  B.u0_star = solve_u0_star(spec, disc, schedule, default_C1(spec, umin), umin);
  try {
    B.super = build_supersolution(spec, disc->grid, schedule.s_values.back(), delta0, -umin);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoAdmissibleRho) throw;
  }
  B.psi = boundary_barrier_psi(spec, schedule.s_values.back(), B.u0_star.last());
  return B;
}

QuotientBarriers build_quotient_barriers(const ProblemSpec& spec, std::shared_ptr<const Discretization> unit_disc,
                                         const ContinuationSchedule& schedule) {
  QuotientBarriers B{maclaurin_subsolution(spec, unit_disc, schedule),
                     power_subsolution(spec, unit_disc, schedule, 100.0),
                     constant_sigma_k_supersolution(spec, unit_disc, schedule, spec.c0_bound())};
  return B;
}

}  // namespace expander
