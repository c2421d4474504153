// Acceptance criteria AC1..AC12: one PASS/FAIL line each, exit status 1 if
// any criterion fails.
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "expander/barrier_forge.hpp"
#include "expander/cli_io.hpp"
#include "expander/estimate_auditor.hpp"
#include "expander/radial_oracle.hpp"

using namespace expander;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%-5s %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

GridSpec grid_spec(int n_r) {
  GridSpec gs;
  gs.n_r = n_r;
  gs.n_theta = 2 * n_r;
  return gs;
}

std::shared_ptr<const Discretization> unit_disc(int n_r) {
  return make_discretization(std::make_shared<BallGrid>(build_grid(grid_spec(n_r), 1.0)));
}

ProblemSpec gauss_spec(double alpha, double c0 = 1.0) {
  ProblemSpec spec;
  spec.n = 2;
  spec.k = 2;
  spec.alpha = alpha;
  spec.phi.c0 = c0;
  return spec;
}

const DualField& at_s(const ContinuationResult& run, double s) {
  for (const auto& f : run.fields)
    if (std::abs(f.param - s) < 1e-12) return f;
  throw Error(ErrorCode::InsufficientData, "no field at the requested parameter");
}

// One Gauss run together with its barriers.
struct GaussCase {
  ProblemSpec spec;
  ContinuationSchedule schedule;
  std::shared_ptr<const Discretization> disc;
  GaussBarriers barriers;
  ContinuationResult run;
  double seconds = 0.0;
};

GaussCase gauss_case(const ProblemSpec& spec, int n_r) {
  const auto t0 = Clock::now();
  GaussCase c{spec, ContinuationSchedule{}, unit_disc(n_r), {}, {}, 0.0};
  c.barriers = build_gauss_barriers(spec, c.disc, c.schedule, 0.1);
  c.run = solve_gauss_dual(spec, c.disc, c.schedule);
  c.seconds = seconds_since(t0);
  return c;
}

struct QuotientCase {
  ProblemSpec spec;
  ContinuationSchedule schedule;
  QuotientBarriers barriers;
  ContinuationResult run;
  double seconds = 0.0;
};

QuotientCase quotient_case(int n_r) {
  const auto t0 = Clock::now();
  QuotientCase c;
  c.spec.n = 2;
  c.spec.k = 1;
  c.spec.alpha = 1.0;
  c.barriers = build_quotient_barriers(c.spec, unit_disc(n_r), c.schedule);
  c.run = solve_quotient_dual(c.spec, grid_spec(n_r), c.schedule, c.barriers.maclaurin.limit_or_last());
  c.seconds = seconds_since(t0);
  return c;
}

std::vector<DualField> pick(const ContinuationResult& run, std::initializer_list<double> s) {
  std::vector<DualField> out;
  for (double v : s) out.push_back(at_s(run, v));
  return out;
}

std::vector<double> smooth_perturbation(const BallGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double a[4][4];
  for (auto& row : a)
    for (double& v : row) v = U(rng);
  const double psi = 3.14159 * U(rng);
  std::vector<double> v(g.node_count());
  for (int p = 0; p < g.node_count(); ++p) {
    double acc = 0.0;
    for (int m = 0; m < 4; ++m)
      for (int j = 0; j < 4; ++j) acc += a[m][j] * std::pow(g.rho[p], m + 2 * j) * std::cos(m * (g.theta[p] + psi));
    v[p] = acc;
  }
  return v;
}

double jacobian_fd_error(const OperatorContext& ctx, const std::vector<double>& u, const std::vector<double>& v) {
  const double eps = 1e-5;
  std::vector<double> up(u), um(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    up[i] += eps * v[i];
    um[i] -= eps * v[i];
  }
  const auto rp = assemble_residual(ctx, up);
  const auto rm = assemble_residual(ctx, um);
  const auto jv = assemble_jacobian_action(ctx, u, v);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double fd = (rp.values[i] - rm.values[i]) / (2.0 * eps);
    num = std::max(num, std::abs(fd - jv.values[i]));
    den = std::max(den, std::abs(jv.values[i]));
  }
  return num / den;
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return fa && fb && sa.str() == sb.str();
}

}  // namespace

int main() {
  // AC1: α = n = 2, s = 0.9, exact solution -√((1-s|ξ|²)/s).
  report("AC1", "manufactured exact solution", [] {
    const double s = 0.9;
    const ProblemSpec spec = gauss_spec(2.0, std::sqrt((1.0 - s) / s));
    double err[2] = {0, 0}, secs = 0.0;
    const int levels[2] = {64, 128};
    for (int i = 0; i < 2; ++i) {
      const auto t0 = Clock::now();
      auto disc = unit_disc(levels[i]);
      const auto run = continue_gauss(disc, spec.phi, {s}, gauss_rhs_for(spec), NewtonOptions{},
                                      dirichlet_initial_guess(*disc->grid, spec.phi));
      const BallGrid& g = *disc->grid;
      for (int p = 0; p < g.node_count(); ++p) {
        const double exact = -std::sqrt((1.0 - s * g.rho[p] * g.rho[p]) / s);
        err[i] = std::max(err[i], std::abs(run.fields.back().values[p] - exact));
      }
      if (i == 1) secs = seconds_since(t0);
    }
    const double ratio = err[0] / err[1];
    return Outcome{err[1] <= 1e-3 && ratio >= 1.5 && secs <= 60.0,
                   fmt("err(64)=%.3e err(128)=%.3e ratio=%.2f time(128x256)=%.1fs", err[0], err[1], ratio, secs)};
  });

  const GaussCase g1 = gauss_case(gauss_spec(1.0), 64);
  const QuotientCase q1 = quotient_case(64);

  report("AC2", "radial oracle equivalence", [&] {
    const auto P = solve_radial_gauss(2, 1.0, 0.99, -1.0);
    const auto cg = compare_with_grid(P, at_s(g1.run, 0.99));
    const auto& qf = q1.run.fields.back();
    const auto tr = qf.boundary_trace();
    double mean = 0.0;
    for (double v : tr) mean += v;
    mean /= static_cast<double>(tr.size());
    const auto Q = solve_radial_quotient(2, 1, 1.0, qf.param, mean);
    const auto cq = compare_with_grid(Q, qf);
    const bool ok = cg.max_rel <= 1e-2 && cq.max_rel <= 1e-2 && g1.seconds <= 120.0 && q1.seconds <= 120.0;
    return Outcome{ok, fmt("gauss s=0.99 max rel %.3e (run %.1fs), quotient r=%.2f max rel %.3e (run %.1fs)",
                           cg.max_rel, g1.seconds, qf.param, cq.max_rel, q1.seconds)};
  });

  report("AC3", "barrier sandwiches", [&] {
    const auto g = check_c0_sandwich(g1.run.fields, g1.barriers.ubar_star.run.fields, nullptr,
                                     g1.spec.c0_bound());
    const auto q = check_c0_sandwich_quotient(q1.run.fields, q1.barriers.const_super,
                                              q1.barriers.maclaurin.limit_or_last());
    return Outcome{g.passed && q.passed,
                   fmt("gauss min slack %.3e (interior %.3e) over %zu s, quotient min slack %.3e (interior %.3e) "
                       "over %zu r",
                       g.get("min_slack"), g.get("interior_min_slack"), g1.run.fields.size(), q.get("min_slack"),
                       q.get("interior_min_slack"), q1.run.fields.size())};
  });

  report("AC4", "gradient bound uniformity", [&] {
    const auto r = check_gradient_upper(pick(g1.run, {0.9, 0.99, 0.999}));
    return Outcome{r.passed, fmt("max h|Du*| = %.4f / %.4f / %.4f, variation %.2f%%", r.get("max_h_grad[0.9]"),
                                 r.get("max_h_grad[0.99]"), r.get("max_h_grad[0.999]"), 100 * r.get("variation"))};
  });

  report("AC5", "boundary gradient blow-up", [&] {
    const auto r = check_gradient_lower(at_s(g1.run, 0.999), 0.05);
    return Outcome{r.passed, fmt("min |Du*|/log|log h| = %.3f on %g nodes, edge/h=0.2 ratio %.2f, breaks %g",
                                 r.get("min_ratio"), r.get("annulus_nodes"), r.get("edge_over_h_0.2"),
                                 r.get("monotonicity_breaks"))};
  });

  const GaussCase g2 = gauss_case(gauss_spec(2.0), 64);

  report("AC6", "eta exponent", [&] {
    const auto a = check_eta_exponent(at_s(g1.run, 0.999), g1.barriers.u0_star.last(), m_alpha(2, 1.0));
    const auto b = check_eta_exponent(at_s(g2.run, 0.999), g2.barriers.u0_star.last(), m_alpha(2, 2.0));
    return Outcome{a.passed && b.passed, fmt("alpha=1 slope %.3f (need %.2f), alpha=2 slope %.3f (need %.2f)",
                                             a.get("slope"), a.threshold, b.get("slope"), b.threshold)};
  });

  report("AC7", "Pogorelov stability", [&] {
    const auto q = make_pogorelov_dual(2, 2.0);
    const auto r = check_pogorelov_dual(pick(g2.run, {0.9, 0.99, 0.999}), g2.barriers.u0_star.last(), q);
    return Outcome{r.passed && q.beta == 16.0,
                   fmt("beta=%g, max eta^beta u_zz = %.4e / %.4e / %.4e, variation %.2f%%", q.beta,
                       r.get("max_eta_beta_uzz[0.9]"), r.get("max_eta_beta_uzz[0.99]"),
                       r.get("max_eta_beta_uzz[0.999]"), 100 * r.get("variation"))};
  });

  report("AC8", "primal certificate", [&] {
    std::vector<double> xs, ys;
    polar_samples(reconstruction_radii(50.0), 32, xs, ys);
    const auto sg = legendre_transform(g1.run.limit->field, xs, ys, 1e-6, &g1.spec.phi);
    const auto sq = legendre_transform(q1.run.fields.back(), xs, ys);
    const auto a = check_primal_certificate(sg, g1.spec);
    const auto b = check_primal_certificate(sq, q1.spec);
    return Outcome{a.passed && b.passed,
                   fmt("gauss limit: max|Du| %.6f min kappa %.3f residual %.2e (%g samples); quotient r=0.99: max|Du| "
                       "%.6f min kappa %.3f residual %.2e (%g samples)",
                       a.get("max_grad"), a.get("min_kappa"), a.get("max_abs_residual"), a.get("residual_samples"),
                       b.get("max_grad"), b.get("min_kappa"), b.get("max_abs_residual"), b.get("residual_samples"))};
  });

  report("AC9", "asymptotics", [&] {
    ProblemSpec spec = gauss_spec(1.0);
    spec.phi.mode = BoundaryData::Mode::cosine_series;
    spec.phi.terms = {{2, 0.3, 0.0}};
    auto disc = unit_disc(64);
    const auto run = solve_gauss_dual(spec, disc, ContinuationSchedule{});
    const DualField& f = run.limit ? run.limit->field : run.fields.back();
    double dev[3];
    const double radii[3] = {10.0, 20.0, 50.0};
    for (int i = 0; i < 3; ++i) {
      std::vector<double> xs, ys;
      polar_samples({radii[i]}, 64, xs, ys);
      const auto s = legendre_transform(f, xs, ys, 1e-6, &spec.phi);
      dev[i] = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j)
        dev[i] = std::max(dev[i], std::abs(s.u[j] - radii[i] - spec.phi.value(std::atan2(ys[j], xs[j]))));
    }
    return Outcome{dev[2] <= 0.05 && dev[0] > dev[1] && dev[1] > dev[2],
                   fmt("max |u(R theta) - R - phi| = %.4e / %.4e / %.4e at R = 10 / 20 / 50", dev[0], dev[1], dev[2])};
  });

  report("AC10", "uniqueness probe", [&] {
    std::vector<double> a = g1.barriers.u0_star.last().values;
    std::vector<double> b = g1.barriers.ubar_star.run.fields.front().values;
    for (double& v : b) v -= 0.1;
    const auto ra = solve_gauss_dual(g1.spec, g1.disc, g1.schedule, a);
    const auto rb = solve_gauss_dual(g1.spec, g1.disc, g1.schedule, b);
    double worst = 0.0;
    for (std::size_t i = 0; i < ra.fields.size(); ++i)
      for (std::size_t p = 0; p < ra.fields[i].values.size(); ++p)
        worst = std::max(worst, std::abs(ra.fields[i].values[p] - rb.fields[i].values[p]));
    return Outcome{worst <= 1e-8 && ra.fields.size() == g1.schedule.s_values.size(),
                   fmt("max difference %.3e over %zu schedule points", worst, ra.fields.size())};
  });

  report("AC11", "Jacobian correctness", [&] {
    std::mt19937_64 rng(20240611);
    auto disc = unit_disc(32);
    const ProblemSpec gs = gauss_spec(1.0);
    const auto gr = solve_gauss_dual(gs, disc, ContinuationSchedule{{0.5, 0.9}, {0.5}, 1e-9, 60, 1.0 / 1024});
    const auto gctx = make_gauss_context(disc, 0.9, gauss_rhs_for(gs));
    ProblemSpec qs = gauss_spec(1.0);
    qs.k = 1;
    const auto mac = maclaurin_subsolution(qs, disc, ContinuationSchedule{});
    const auto qctx = make_quotient_context(disc, 1, quotient_rhs_for(qs));
    double worst_g = 0.0, worst_q = 0.0;
    for (int t = 0; t < 100; ++t) {
      worst_g = std::max(worst_g, jacobian_fd_error(gctx, gr.fields.back().values, smooth_perturbation(*disc->grid, rng)));
      worst_q = std::max(worst_q, jacobian_fd_error(qctx, mac.limit_or_last().values, smooth_perturbation(*disc->grid, rng)));
    }
    return Outcome{worst_g <= 1e-6 && worst_q <= 1e-6,
                   fmt("max relative deviation %.2e (gauss), %.2e (quotient) over 100 perturbations each", worst_g,
                       worst_q)};
  });

  report("AC12", "determinism", [&] {
    const fs::path root = fs::temp_directory_path() / "expander_ac12";
    fs::remove_all(root);
    RunConfig g = parse_config("n=2, alpha=1, grid.n_r=32, grid.n_theta=64");
    RunConfig q = parse_config("n=2, k=1, alpha=1, grid.n_r=32, grid.n_theta=64");
    for (const char* rep : {"a", "b"}) {
      run_solve_gauss(g, root / rep / "gauss");
      run_audit(root / rep / "gauss", root / rep / "gauss_audit");
      run_solve_quotient(q, root / rep / "quotient");
      run_audit(root / rep / "quotient", root / rep / "quotient_audit");
    }
    int files = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
      if (!e.is_regular_file()) continue;
      ++files;
      if (!same_bytes(e.path(), root / "b" / fs::relative(e.path(), root / "a"))) ++differing;
    }
    fs::remove_all(root);
    return Outcome{files > 0 && differing == 0, fmt("%d files compared, %d differ", files, differing)};
  });

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
