#include "expander/ma_operator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace expander {

Scheme parse_scheme(const std::string& name) {
  if (name == "polar") return Scheme::polar;
  if (name == "monotone") return Scheme::monotone;
  throw Error(ErrorCode::ParseError, "unknown scheme '" + name + "'");
}

std::string to_string(Scheme scheme) { return scheme == Scheme::polar ? "polar" : "monotone"; }

std::shared_ptr<const Discretization> make_discretization(GridPtr grid, Scheme scheme) {
  auto d = std::make_shared<Discretization>();
  d->grid = grid;
  d->scheme = scheme;
  d->stencil = std::make_shared<PolarStencil>(*grid);
  if (scheme == Scheme::monotone) d->wide = std::make_shared<WideStencil>(*grid, grid->stencil_width);
  const int W = grid->stencil_width;
  for (int j = 0; j < W; ++j) {
    const double psi = j * std::numbers::pi / (2.0 * W);
    const double c = std::cos(psi), s = std::sin(psi);
    d->cc.push_back(c * c);
    d->cs2.push_back(2.0 * c * s);
    d->ss.push_back(s * s);
  }
  return d;
}

GaussRhs gauss_rhs_for(const ProblemSpec& spec) {
  return {1.0, (spec.alpha - spec.n - 2.0) / 2.0, spec.alpha};
}

QuotientRhs quotient_rhs_for(const ProblemSpec& spec) { return {1.0, spec.alpha, spec.alpha}; }

namespace {

void fill_weights(OperatorContext& ctx) {
  const BallGrid& g = ctx.grid();
  ctx.h.resize(g.node_count());
  ctx.w.resize(g.node_count());
  for (int p = 0; p < g.node_count(); ++p) {
    const double r2 = g.rho[p] * g.rho[p];
    ctx.h[p] = 1.0 - ctx.s * r2;
    ctx.w[p] = std::sqrt(std::max(0.0, 1.0 - r2));
  }
}

std::string where(const BallGrid& g, int p) {
  std::ostringstream os;
  os << "node " << p << " at (" << g.x[p] << ", " << g.y[p] << ")";
  return os.str();
}

}  // namespace

OperatorContext make_gauss_context(std::shared_ptr<const Discretization> disc, double s, GaussRhs rhs) {
  OperatorContext ctx;
  ctx.disc = std::move(disc);
  ctx.kind = CaseTag::gauss;
  ctx.k = 2;
  ctx.s = s;
  ctx.gauss = rhs;
  fill_weights(ctx);
  return ctx;
}

OperatorContext make_quotient_context(std::shared_ptr<const Discretization> disc, int k, QuotientRhs rhs) {
  OperatorContext ctx;
  ctx.disc = std::move(disc);
  ctx.kind = CaseTag::quotient;
  ctx.k = k;
  ctx.s = 1.0;
  ctx.quotient = rhs;
  fill_weights(ctx);
  return ctx;
}

double sigma_quotient(const std::vector<double>& lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  for (double l : lambda) {
    if (!(l > 0.0)) {
      std::ostringstream os;
      os << "eigenvalue " << l;
      throw Error(ErrorCode::NonEllipticPoint, os.str());
    }
  }
  return sigma_k(lambda, n) / sigma_k(lambda, n - k);
}

OperatorEval evaluate_operator(const OperatorContext& ctx, const std::vector<double>& u) {
  const BallGrid& g = ctx.grid();
  const int M = g.interior_count();
  OperatorEval ev;
  ev.H = ctx.disc->stencil->hessian(u);
  ev.op.assign(M, 0.0);
  ev.drr.assign(M, 0.0);
  ev.drt.assign(M, 0.0);
  ev.dtt.assign(M, 0.0);
  ev.active.assign(M, 0);

  if (ctx.kind == CaseTag::gauss && ctx.disc->scheme == Scheme::polar) {
    const auto pairs = ctx.disc->pairs();
    kernels::min_pair_product(ev.H.hrr.data(), ev.H.hrt.data(), ev.H.htt.data(), M, pairs, ev.op.data(),
                              ev.active.data());
    for (int p = 0; p < M; ++p) {
      const int j = ev.active[p];
      const double d = (pairs.cc[j] * ev.H.hrr[p] + pairs.cs2[j] * ev.H.hrt[p]) + pairs.ss[j] * ev.H.htt[p];
      const double e = (ev.H.hrr[p] + ev.H.htt[p]) - d;
      const double A = d > 0.0 ? std::max(e, 0.0) : 0.0;
      const double B = e > 0.0 ? std::max(d, 0.0) : 0.0;
      ev.drr[p] = A * pairs.cc[j] + B * (1.0 - pairs.cc[j]);
      ev.drt[p] = (A - B) * pairs.cs2[j];
      ev.dtt[p] = A * pairs.ss[j] + B * (1.0 - pairs.ss[j]);
    }
    return ev;
  }

  if (ctx.kind == CaseTag::gauss) {
    const WideStencil& ws = *ctx.disc->wide;
    ev.dA.assign(M, 0.0);
    ev.dB.assign(M, 0.0);
    for (int p = 0; p < M; ++p) {
      int j = 0;
      ev.op[p] = ws.det(u, p, &j);
      ev.active[p] = j;
      const double d = ws.form(p, j, 0).apply(u);
      const double e = ws.form(p, j, 1).apply(u);
      ev.dA[p] = d > 0.0 ? std::max(e, 0.0) : 0.0;
      ev.dB[p] = e > 0.0 ? std::max(d, 0.0) : 0.0;
    }
    return ev;
  }

  for (int p = 0; p < M; ++p) {
    const double w = ctx.w[p];
    const double hrr = ev.H.hrr[p], hrt = ev.H.hrt[p], htt = ev.H.htt[p];
    const double w2 = w * w, w3 = w2 * w, w4 = w2 * w2;
    const double s2 = w4 * (hrr * htt - hrt * hrt);
    const double s1 = w3 * hrr + w * htt;
    if (!(s1 > 0.0) || !(s2 > 0.0)) {
      std::ostringstream os;
      os << where(g, p) << " sigma1=" << s1 << " sigma2=" << s2;
      throw Error(ErrorCode::NonEllipticPoint, os.str());
    }
    if (ctx.k == 2) {
      ev.op[p] = s2;
      ev.drr[p] = w4 * htt;
      ev.drt[p] = -2.0 * w4 * hrt;
      ev.dtt[p] = w4 * hrr;
    } else {
      const double q = s2 / s1;
      ev.op[p] = q;
      ev.drr[p] = (w4 * htt - q * w3) / s1;
      ev.drt[p] = (-2.0 * w4 * hrt) / s1;
      ev.dtt[p] = (w4 * hrr - q * w) / s1;
    }
  }
  return ev;
}

double det_hessian_ws(const OperatorContext& ctx, const std::vector<double>& u, int node) {
  const BallGrid& g = ctx.grid();
  if (node < 0 || node >= g.interior_count()) {
    throw Error(ErrorCode::IncompleteStencil, where(g, std::max(node, 0)) + " has no full stencil");
  }
  if (ctx.disc->scheme == Scheme::monotone) return ctx.disc->wide->det(u, node);
  const auto h = ctx.disc->stencil->hessian_at(u, node);
  double value = 0.0;
  int active = 0;
  kernels::min_pair_product_scalar(&h[0], &h[1], &h[2], 1, ctx.disc->pairs(), &value, &active);
  return value;
}

namespace {

void require_negative(const OperatorContext& ctx, double u, int node) {
  if (!(u < 0.0)) {
    std::ostringstream os;
    os << where(ctx.grid(), node) << " u*=" << u;
    throw Error(ErrorCode::NonnegativePotential, os.str());
  }
}

}  // namespace

double dual_rhs_gauss(const OperatorContext& ctx, double u_star, int node) {
  require_negative(ctx, u_star, node);
  const auto& r = ctx.gauss;
  return r.c * std::pow(ctx.h[node], r.p) * std::pow(-u_star, -r.a);
}

double dual_rhs_quotient(const OperatorContext& ctx, double u_star, int node) {
  require_negative(ctx, u_star, node);
  const auto& r = ctx.quotient;
  return r.coef * std::pow(ctx.w[node], r.wp) * std::pow(-u_star, -r.up);
}

double dual_rhs(const OperatorContext& ctx, double u_star, int node) {
  return ctx.kind == CaseTag::gauss ? dual_rhs_gauss(ctx, u_star, node) : dual_rhs_quotient(ctx, u_star, node);
}

double dual_rhs_du(const OperatorContext& ctx, double u_star, int node) {
  require_negative(ctx, u_star, node);
  if (ctx.kind == CaseTag::gauss) {
    const auto& r = ctx.gauss;
    return r.c * std::pow(ctx.h[node], r.p) * r.a * std::pow(-u_star, -r.a - 1.0);
  }
  const auto& r = ctx.quotient;
  return r.coef * std::pow(ctx.w[node], r.wp) * r.up * std::pow(-u_star, -r.up - 1.0);
}

ResidualVector residual_from_eval(const OperatorContext& ctx, const std::vector<double>& u,
                                  const OperatorEval& ev) {
  const BallGrid& g = ctx.grid();
  const int M = g.interior_count();
  ResidualVector R;
  R.values.assign(g.node_count(), 0.0);
  double sum = 0.0;
  for (int p = 0; p < M; ++p) {
    const double rhs = dual_rhs(ctx, u[p], p);
    const double r = ev.op[p] - rhs;
    R.values[p] = r;
    sum += r * r;
    R.max_abs = std::max(R.max_abs, std::abs(r));
    const double scaled = std::abs(r) / rhs;
    if (R.worst_node < 0 || scaled > R.max_scaled) {
      R.max_scaled = scaled;
      R.worst_node = p;
    }
  }
  R.l2 = std::sqrt(sum / M);
  return R;
}

ResidualVector assemble_residual(const OperatorContext& ctx, const std::vector<double>& u) {
  return residual_from_eval(ctx, u, evaluate_operator(ctx, u));
}

namespace {

// Calls f(q, coefficient) for every dependency of the operator at interior node p.
template <class F>
void for_each_op_derivative(const OperatorContext& ctx, const OperatorEval& ev, int p, F&& f) {
  if (ctx.kind == CaseTag::gauss && ctx.disc->scheme == Scheme::monotone) {
    const WideStencil& ws = *ctx.disc->wide;
    const int j = ev.active[p];
    for (const auto& [q, c] : ws.form(p, j, 0).terms) f(q, ev.dA[p] * c);
    for (const auto& [q, c] : ws.form(p, j, 1).terms) f(q, ev.dB[p] * c);
    return;
  }
  const PolarStencil& st = *ctx.disc->stencil;
  for (const StencilTerm* t = st.terms_begin(p); t != st.terms_end(p); ++t) {
    f(t->node, ev.drr[p] * t->crr + ev.drt[p] * t->crt + ev.dtt[p] * t->ctt);
  }
}

}  // namespace

ResidualVector assemble_jacobian_action(const OperatorContext& ctx, const std::vector<double>& u,
                                        const std::vector<double>& perturbation) {
  const BallGrid& g = ctx.grid();
  const int M = g.interior_count();
  const OperatorEval ev = evaluate_operator(ctx, u);
  ResidualVector R;
  R.values.assign(g.node_count(), 0.0);
  double sum = 0.0;
  for (int p = 0; p < M; ++p) {
    double acc = 0.0;
    for_each_op_derivative(ctx, ev, p, [&](int q, double c) { acc += c * perturbation[q]; });
    acc -= dual_rhs_du(ctx, u[p], p) * perturbation[p];
    R.values[p] = acc;
    sum += acc * acc;
    R.max_abs = std::max(R.max_abs, std::abs(acc));
  }
  R.l2 = std::sqrt(sum / M);
  return R;
}

Eigen::SparseMatrix<double> assemble_jacobian(const OperatorContext& ctx, const std::vector<double>& u,
                                              const OperatorEval& ev) {
  const BallGrid& g = ctx.grid();
  const int M = g.interior_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(M) * 12 + g.n_theta);
  for (int p = 0; p < M; ++p) {
    for_each_op_derivative(ctx, ev, p, [&](int q, double c) {
      if (q < M && c != 0.0) trip.emplace_back(p, q, c);
    });
    trip.emplace_back(p, p, -dual_rhs_du(ctx, u[p], p));
  }
  Eigen::SparseMatrix<double> J(M, M);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

}  // namespace expander
