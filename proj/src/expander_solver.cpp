#include "expander/expander_solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace expander {

NewtonOptions newton_options(const ContinuationSchedule& schedule) {
  NewtonOptions o;
  o.tol = schedule.newton_tol;
  o.max_iters = schedule.max_newton_iters;
  o.damping_floor = schedule.damping_floor;
  return o;
}

namespace {

// Residual of a trial iterate, or nullopt when it leaves the admissible set.
std::optional<ResidualVector> try_residual(const OperatorContext& ctx, const std::vector<double>& u) {
  for (int p = 0; p < ctx.grid().interior_count(); ++p) {
    if (!(u[p] < 0.0)) return std::nullopt;
  }
  try {
    return assemble_residual(ctx, u);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonEllipticPoint || e.code() == ErrorCode::NonnegativePotential) return std::nullopt;
    throw;
  }
}

}  // namespace

namespace {

struct Linearization {
  Eigen::SparseMatrix<double> J;
  std::vector<double> floor;  // roundoff-attainable |R_p| from storing u in double
};

Linearization linearize(const OperatorContext& ctx, const std::vector<double>& u) {
  const int M = ctx.grid().interior_count();
  const OperatorEval ev = evaluate_operator(ctx, u);
  Linearization L;
  L.J = assemble_jacobian(ctx, u, ev);
  Eigen::VectorXd absu(M);
  for (int p = 0; p < M; ++p) absu[p] = std::abs(u[p]);
  const Eigen::VectorXd row = L.J.cwiseAbs() * absu;
  L.floor.resize(M);
  for (int p = 0; p < M; ++p) L.floor[p] = 8.0 * std::numeric_limits<double>::epsilon() * row[p];
  return L;
}

bool converged(const OperatorContext& ctx, const std::vector<double>& u, const ResidualVector& r,
               const std::vector<double>& floor, double tol, bool& roundoff_limited) {
  roundoff_limited = false;
  if (r.max_scaled <= tol) return true;
  for (int p = 0; p < ctx.grid().interior_count(); ++p) {
    const double a = std::abs(r.values[p]);
    if (a <= tol * dual_rhs(ctx, u[p], p)) continue;
    if (a > floor[p]) return false;
  }
  roundoff_limited = true;
  return true;
}

NewtonStepResult damped_update(const OperatorContext& ctx, const std::vector<double>& iterate,
                               const ResidualVector& residual, const Eigen::SparseMatrix<double>& J,
                               double damping_floor) {
  const int M = ctx.grid().interior_count();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(J);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::LinearSolveFailed, "sparse LU factorization failed");
  Eigen::VectorXd rhs(M);
  for (int p = 0; p < M; ++p) rhs[p] = -residual.values[p];
  const Eigen::VectorXd delta = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !delta.allFinite()) {
    throw Error(ErrorCode::LinearSolveFailed, "sparse LU solve failed");
  }

  NewtonStepResult out;
  std::vector<double> trial = iterate;
  for (double t = 1.0; t >= damping_floor; t *= 0.5) {
    for (int p = 0; p < M; ++p) trial[p] = iterate[p] + t * delta[p];
    auto r = try_residual(ctx, trial);
    if (r && r->max_scaled < residual.max_scaled) {
      out.iterate = trial;
      out.damping = t;
      out.residual = std::move(*r);
      return out;
    }
  }
  std::ostringstream os;
  os << "no damping >= " << damping_floor << " reduces the residual " << residual.max_scaled;
  throw Error(ErrorCode::DampingExhausted, os.str());
}

}  // namespace

NewtonStepResult newton_step(const OperatorContext& ctx, const std::vector<double>& iterate,
                             const ResidualVector& residual, double damping_floor) {
  if (residual.max_abs == 0.0) {
    NewtonStepResult out;
    out.iterate = iterate;
    out.damping = 1.0;
    out.residual = residual;
    return out;
  }
  const OperatorEval ev = evaluate_operator(ctx, iterate);
  return damped_update(ctx, iterate, residual, assemble_jacobian(ctx, iterate, ev), damping_floor);
}

NewtonResult newton_solve(const OperatorContext& ctx, std::vector<double> initial, const NewtonOptions& opts) {
  NewtonResult res;
  auto r0 = try_residual(ctx, initial);
  if (!r0) {
    std::ostringstream os;
    os << "inadmissible initial iterate at param " << ctx.s;
    throw Error(ErrorCode::NewtonDiverged, os.str());
  }
  res.u = std::move(initial);
  res.residual = std::move(*r0);
  while (true) {
    const Linearization L = linearize(ctx, res.u);
    if (converged(ctx, res.u, res.residual, L.floor, opts.tol, res.roundoff_limited)) break;
    if (res.iterations >= opts.max_iters) {
      std::ostringstream os;
      os << "max iterations reached at param " << ctx.s << ", residual " << res.residual.max_scaled;
      throw Error(ErrorCode::NewtonDiverged, os.str());
    }
    try {
      auto step = damped_update(ctx, res.u, res.residual, L.J, opts.damping_floor);
      res.u = std::move(step.iterate);
      res.residual = std::move(step.residual);
      res.damping.push_back(step.damping);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DampingExhausted && e.code() != ErrorCode::LinearSolveFailed) throw;
      std::ostringstream os;
      os << e.what() << " (param " << ctx.s << ", iteration " << res.iterations << ")";
      throw Error(ErrorCode::NewtonDiverged, os.str());
    }
    ++res.iterations;
  }
  if (opts.convexity_tol > 0.0) {
    DualField f{ctx.disc->grid, res.u, ctx.s};
    FieldGeometry geo(f, ctx.disc->stencil);
    try {
      require_discrete_convexity(geo, opts.convexity_tol);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConvexityLost, e.what());
    }
  }
  return res;
}

LimitField extrapolate_to_limit(const std::vector<DualField>& fields, const std::vector<double>& params) {
  if (fields.size() < 3 || params.size() != fields.size()) {
    std::ostringstream os;
    os << fields.size() << " fields, " << params.size() << " params";
    throw Error(ErrorCode::InsufficientData, os.str());
  }
  const std::size_t n = fields.size();
  const std::size_t N = fields.back().values.size();
  auto extrap = [&](std::size_t i, std::size_t j, std::size_t p) {
    const double xi = 1.0 - params[i], xj = 1.0 - params[j];
    return (xi * fields[j].values[p] - xj * fields[i].values[p]) / (xi - xj);
  };
  LimitField L;
  L.field.grid = fields.back().grid;
  L.field.param = 1.0;
  L.field.values.resize(N);
  L.error.resize(N);
  L.non_monotone.assign(N, 0);
  for (std::size_t p = 0; p < N; ++p) {
    const double e1 = extrap(n - 2, n - 1, p);
    const double e0 = extrap(n - 3, n - 2, p);
    L.field.values[p] = e1;
    L.error[p] = std::abs(e1 - e0);
    int sign = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double d = fields[i + 1].values[p] - fields[i].values[p];
      const int sg = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
      if (sg == 0) continue;
      if (sign != 0 && sg != sign) L.non_monotone[p] = 1;
      sign = sg;
    }
  }
  return L;
}

void impose_dual_boundary(const BallGrid& grid, const BoundaryData& phi, std::vector<double>& u) {
  for (int a = 0; a < grid.n_theta; ++a) u[grid.index(grid.n_r, a)] = phi.dual(grid.angles[a]);
}

std::vector<double> dirichlet_initial_guess(const BallGrid& grid, const BoundaryData& phi) {
  std::vector<double> u(grid.node_count());
  double A = 0.5;
  if (phi.mode == BoundaryData::Mode::cosine_series) {
    for (const auto& t : phi.terms) A += std::abs(t.amplitude) * t.frequency * (t.frequency - 1) / 2.0;
  }
  const double R = grid.radius;
  for (int p = 0; p < grid.node_count(); ++p) {
    const double q = grid.rho[p] / R;
    double harm = -phi.c0;
    if (phi.mode == BoundaryData::Mode::cosine_series) {
      for (const auto& t : phi.terms)
        harm -= t.amplitude * std::pow(q, t.frequency) * std::cos(t.frequency * grid.theta[p] + t.phase);
    }
    u[p] = harm + A * (q * q - 1.0);
  }
  impose_dual_boundary(grid, phi, u);
  return u;
}

namespace {

using Clock = std::chrono::steady_clock;

// Solves at `target` starting from a solution at `from` (or from scratch),
// inserting midpoints when Newton fails.
NewtonResult solve_with_halving(const std::function<OperatorContext(double)>& make_ctx,
                                const std::function<std::vector<double>(double, const std::vector<double>&, double)>& warm,
                                double from, const std::vector<double>& u_from, double target,
                                const NewtonOptions& opts, int depth, int& substeps) {
  try {
    return newton_solve(make_ctx(target), warm(from, u_from, target), opts);
  } catch (const Error& e) {
    if (depth >= 5 || (e.code() != ErrorCode::NewtonDiverged && e.code() != ErrorCode::ConvexityLost)) throw;
  }
  const double mid = 0.5 * (from + target);
  ++substeps;
  NewtonResult m = solve_with_halving(make_ctx, warm, from, u_from, mid, opts, depth + 1, substeps);
  return solve_with_halving(make_ctx, warm, mid, m.u, target, opts, depth + 1, substeps);
}

}  // namespace

ContinuationResult continue_gauss(std::shared_ptr<const Discretization> disc, const BoundaryData& phi,
                                  const std::vector<double>& s_values, GaussRhs rhs, const NewtonOptions& opts,
                                  std::vector<double> initial) {
  ContinuationResult out;
  impose_dual_boundary(*disc->grid, phi, initial);
  auto make_ctx = [&](double s) { return make_gauss_context(disc, s, rhs); };
  auto warm = [](double, const std::vector<double>& u, double) { return u; };
  double prev_s = s_values.empty() ? 0.5 : std::min(0.5, s_values.front());
  std::vector<double> prev_u = initial;
  bool have_prev = false;
  for (double s : s_values) {
    const auto t0 = Clock::now();
    StepRecord rec;
    rec.param = s;
    NewtonResult res;
    if (have_prev) {
      res = solve_with_halving(make_ctx, warm, prev_s, prev_u, s, opts, 0, rec.substeps);
    } else {
      try {
        res = newton_solve(make_ctx(s), initial, opts);
      } catch (const Error& e) {
        if (s <= prev_s || (e.code() != ErrorCode::NewtonDiverged && e.code() != ErrorCode::ConvexityLost)) throw;
        NewtonResult base = newton_solve(make_ctx(prev_s), initial, opts);
        ++rec.substeps;
        res = solve_with_halving(make_ctx, warm, prev_s, base.u, s, opts, 0, rec.substeps);
      }
    }
    rec.iterations = res.iterations;
    rec.residual_scaled = res.residual.max_scaled;
    rec.residual_l2 = res.residual.l2;
    rec.damping = res.damping;
    rec.roundoff_limited = res.roundoff_limited;
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    out.trace.steps.push_back(rec);
    out.fields.push_back(DualField{disc->grid, res.u, s});
    prev_s = s;
    prev_u = std::move(res.u);
    have_prev = true;
  }
  if (out.fields.size() >= 3) out.limit = extrapolate_to_limit(out.fields, s_values);
  return out;
}

ContinuationResult solve_gauss_dual(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc,
                                    const ContinuationSchedule& schedule,
                                    std::optional<std::vector<double>> initial) {
  require_valid(spec);
  if (spec.k != spec.n || spec.n != 2) throw Error(ErrorCode::BadOrder, "Gauss solver needs k = n = 2");
  std::vector<double> init = initial ? *initial : dirichlet_initial_guess(*disc->grid, spec.phi);
  return continue_gauss(disc, spec.phi, schedule.s_values, gauss_rhs_for(spec), newton_options(schedule),
                        std::move(init));
}

ContinuationResult solve_quotient_dual(const ProblemSpec& spec, const GridSpec& gs,
                                       const ContinuationSchedule& schedule, const DualField& boundary_source,
                                       QuotientRhs rhs) {
  require_valid(spec);
  if (spec.n != 2 || spec.k >= spec.n) throw Error(ErrorCode::BadOrder, "quotient solver needs k < n = 2");
  const BallGrid& src = *boundary_source.grid;
  const NewtonOptions opts = newton_options(schedule);

  std::vector<std::shared_ptr<const Discretization>> discs;
  auto disc_for = [&](double r) {
    for (const auto& d : discs) {
      if (d->grid->radius == r) return d;
    }
    auto d = make_discretization(std::make_shared<BallGrid>(build_grid(gs, r)), Scheme::polar);
    discs.push_back(d);
    return d;
  };
  auto make_ctx = [&](double r) { return make_quotient_context(disc_for(r), spec.k, rhs); };
  // Previous solution rescaled to the new ball; the source difference restores
  // the Dirichlet data exactly.
  auto warm = [&](double r_from, const std::vector<double>& u_from, double r_to) {
    const BallGrid& g = *disc_for(r_to)->grid;
    std::vector<double> u(g.node_count());
    for (int p = 0; p < g.node_count(); ++p) {
      const double correction = sample_polar(src, boundary_source.values, g.rho[p], g.theta[p]) -
                                sample_polar(src, boundary_source.values, g.rho[p] * r_from / r_to, g.theta[p]);
      u[p] = u_from[p] + correction;
    }
    for (int a = 0; a < g.n_theta; ++a) {
      const int q = g.index(g.n_r, a);
      u[q] = sample_polar(src, boundary_source.values, g.rho[q], g.theta[q]);
    }
    return u;
  };

  ContinuationResult out;
  double prev_r = 0.0;
  std::vector<double> prev_u;
  for (double r : schedule.r_values) {
    const auto t0 = Clock::now();
    StepRecord rec;
    rec.param = r;
    NewtonResult res;
    if (prev_u.empty()) {
      const BallGrid& g = *disc_for(r)->grid;
      res = newton_solve(make_ctx(r), resample(src, boundary_source.values, g), opts);
    } else {
      res = solve_with_halving(make_ctx, warm, prev_r, prev_u, r, opts, 0, rec.substeps);
    }
    rec.iterations = res.iterations;
    rec.residual_scaled = res.residual.max_scaled;
    rec.residual_l2 = res.residual.l2;
    rec.damping = res.damping;
    rec.roundoff_limited = res.roundoff_limited;
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    out.trace.steps.push_back(rec);
    out.fields.push_back(DualField{disc_for(r)->grid, res.u, r});
    prev_r = r;
    prev_u = std::move(res.u);
  }
  if (out.fields.size() >= 3) {
    out.limit = extrapolate_to_limit(out.fields, schedule.r_values);
    out.limit->field.grid = std::make_shared<BallGrid>(build_grid(gs, 1.0));
  }
  return out;
}

ContinuationResult solve_quotient_dual(const ProblemSpec& spec, const GridSpec& gs,
                                       const ContinuationSchedule& schedule, const DualField& boundary_source) {
  return solve_quotient_dual(spec, gs, schedule, boundary_source, quotient_rhs_for(spec));
}

}  // namespace expander
