#include "expander/estimate_auditor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "expander/ma_operator.hpp"

namespace expander {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void mark_worst(CheckRecord& rec, const BallGrid& g, int node) {
  rec.worst_node = node;
  rec.worst_x = g.x[node];
  rec.worst_y = g.y[node];
}

void mark_worst(CheckRecord& rec, const PrimalSurface& s, std::size_t i) {
  rec.worst_node = static_cast<int>(i);
  rec.worst_x = s.x[i];
  rec.worst_y = s.y[i];
}

double grad_norm(const std::array<double, 2>& g) { return std::hypot(g[0], g[1]); }

double h_of(const BallGrid& g, int node, double s) { return 1.0 - s * g.rho[node] * g.rho[node]; }

std::string param_key(const std::string& prefix, double p) {
  std::ostringstream os;
  os.precision(6);
  os << prefix << "[" << p << "]";
  return os.str();
}

std::vector<double> last_three(const std::vector<double>& v) {
  const std::size_t k = std::min<std::size_t>(3, v.size());
  return {v.end() - static_cast<std::ptrdiff_t>(k), v.end()};
}

}  // namespace

double CheckRecord::get(const std::string& key) const {
  for (const auto& [k, v] : quantities)
    if (k == key) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

EstimateReport emit_report(std::vector<CheckRecord> records,
                           std::vector<std::pair<std::string, std::string>> metadata) {
  if (records.empty()) throw Error(ErrorCode::ValidationError, "report needs at least one check record");
  std::stable_sort(records.begin(), records.end(),
                   [](const CheckRecord& a, const CheckRecord& b) { return a.name < b.name; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].name == records[i - 1].name)
      throw Error(ErrorCode::ValidationError, "check '" + records[i].name + "' recorded twice");
  }
  EstimateReport rep;
  rep.metadata = std::move(metadata);
  for (const auto& r : records) {
    if (!r.passed) rep.failures.push_back(r.name);
  }
  rep.passed = rep.failures.empty();
  rep.records = std::move(records);
  return rep;
}

double relative_variation(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*hi == 0.0) return 0.0;
  return (*hi - *lo) / std::abs(*hi);
}

double m_alpha(int n, double alpha) { return (n - 2.0 + alpha) / (2.0 * n); }

PogorelovDualQuantity make_pogorelov_dual(int n, double alpha) {
  PogorelovDualQuantity q;
  q.m_alpha = m_alpha(n, alpha);
  q.beta = 8.0 / q.m_alpha;
  return q;
}

CheckRecord check_c0_sandwich(const std::vector<DualField>& fields, const std::vector<DualField>& ubar,
                              const DualField* u0_star, double c0, double slack) {
  CheckRecord rec;
  rec.name = "c0_sandwich";
  rec.anchor = "lower barrier <= u* <= -C0 by the maximum principle";
  rec.threshold = -slack;
  rec.threshold_rule = "nodewise slack >= -tolerance";
  rec.passed = fields.size() == ubar.size() && !fields.empty();
  double worst = kInf, interior = kInf;
  for (std::size_t i = 0; i < fields.size() && i < ubar.size(); ++i) {
    const auto& f = fields[i];
    const BallGrid& g = *f.grid;
    double lower = kInf, upper = kInf;
    int wl = -1, wu = -1;
    for (int p = 0; p < g.node_count(); ++p) {
      const double dl = f.values[p] - ubar[i].values[p];
      double cap = -c0;
      if (u0_star) cap = std::min(cap, u0_star->values[p]);
      const double du = cap - f.values[p];
      if (dl < lower) lower = dl, wl = p;
      if (du < upper) upper = du, wu = p;
      if (!g.boundary[p]) interior = std::min({interior, dl, du});
    }
    rec.add(param_key("lower_slack", f.param), lower);
    rec.add(param_key("upper_slack", f.param), upper);
    const double m = std::min(lower, upper);
    if (m < worst) {
      worst = m;
      mark_worst(rec, g, lower < upper ? wl : wu);
    }
  }
  rec.add("min_slack", worst);
  rec.add("interior_min_slack", interior);
  rec.passed = rec.passed && worst >= -slack;
  return rec;
}

CheckRecord check_c0_sandwich_quotient(const std::vector<DualField>& fields, const DualField& const_super,
                                       const DualField& maclaurin, double slack) {
  CheckRecord rec;
  rec.name = "c0_sandwich_quotient";
  rec.anchor = "constant sigma_k supersolution <= u_r* <= Maclaurin subsolution";
  rec.threshold = -slack;
  rec.threshold_rule = "nodewise slack >= -tolerance";
  rec.passed = !fields.empty();
  double worst = kInf, interior = kInf;
  for (const auto& f : fields) {
    const BallGrid& g = *f.grid;
    const auto lo = resample(*const_super.grid, const_super.values, g);
    const auto hi = resample(*maclaurin.grid, maclaurin.values, g);
    double lower = kInf, upper = kInf;
    int wl = -1, wu = -1;
    for (int p = 0; p < g.node_count(); ++p) {
      const double dl = f.values[p] - lo[p];
      const double du = hi[p] - f.values[p];
      if (dl < lower) lower = dl, wl = p;
      if (du < upper) upper = du, wu = p;
      if (!g.boundary[p]) interior = std::min({interior, dl, du});
    }
    rec.add(param_key("lower_slack", f.param), lower);
    rec.add(param_key("upper_slack", f.param), upper);
    const double m = std::min(lower, upper);
    if (m < worst) {
      worst = m;
      mark_worst(rec, g, lower < upper ? wl : wu);
    }
  }
  rec.add("min_slack", worst);
  rec.add("interior_min_slack", interior);
  rec.passed = rec.passed && worst >= -slack;
  return rec;
}

CheckRecord check_gradient_upper(const std::vector<DualField>& fields, double tol) {
  CheckRecord rec;
  rec.name = "gradient_upper";
  rec.anchor = "h|Du*| bounded independently of s";
  rec.threshold = tol;
  rec.threshold_rule = "relative variation of max h|Du*| over the last three s values";
  std::vector<double> plain, weighted;
  double best = -1.0;
  for (const auto& f : fields) {
    const BallGrid& g = *f.grid;
    FieldGeometry geo(f);
    double m = 0.0, mw = 0.0;
    int arg = 0;
    for (int p = 0; p < g.node_count(); ++p) {
      const double q = h_of(g, p, f.param) * grad_norm(geo.gradient()[p]);
      const double u = f.values[p];
      if (q > m) m = q, arg = p;
      mw = std::max(mw, q * std::exp(-u * u));
    }
    plain.push_back(m);
    weighted.push_back(mw);
    rec.add(param_key("max_h_grad", f.param), m);
    rec.add(param_key("max_h_grad_weighted", f.param), mw);
    if (m > best) {
      best = m;
      mark_worst(rec, g, arg);
    }
  }
  const double var = relative_variation(last_three(plain));
  rec.add("variation", var);
  rec.add("variation_weighted", relative_variation(last_three(weighted)));
  rec.passed = fields.size() >= 3 && var <= tol;
  if (fields.size() < 3) rec.note = "fewer than three parameter values";
  return rec;
}

CheckRecord check_gradient_lower(const DualField& field, double delta1, double c_audit, double blowup_ratio) {
  CheckRecord rec;
  rec.name = "gradient_lower";
  rec.anchor = "|Du*|/log|log h| bounded below near the boundary";
  rec.threshold = c_audit;
  rec.threshold_rule = "min ratio > c_audit, |Du*| radially nondecreasing on h < delta1, edge/h=0.2 ratio >= 5";
  const BallGrid& g = *field.grid;
  const double s = field.param;
  FieldGeometry geo(field);
  const auto& grad = geo.gradient();

  double min_ratio = kInf;
  int annulus = 0;
  for (int p = 1; p < g.node_count(); ++p) {
    const double h = h_of(g, p, s);
    if (!(h < delta1) || !(h < std::exp(-1.0))) continue;
    ++annulus;
    const double r = grad_norm(grad[p]) / std::log(std::abs(std::log(h)));
    if (r < min_ratio) {
      min_ratio = r;
      mark_worst(rec, g, p);
    }
  }

  int breaks = 0;
  for (int a = 0; a < g.n_theta; ++a) {
    double prev = -kInf;
    for (int j = 1; j <= g.n_r; ++j) {
      const int p = g.index(j, a);
      if (!(h_of(g, p, s) < delta1)) continue;
      const double d = grad_norm(grad[p]);
      if (d < prev * (1.0 - 1e-12)) ++breaks;
      prev = d;
    }
  }

  auto ring_mean = [&](int j) {
    double acc = 0.0;
    for (int a = 0; a < g.n_theta; ++a) acc += grad_norm(grad[g.index(j, a)]);
    return acc / g.n_theta;
  };
  const double rho_ref = std::sqrt(std::max(0.0, 0.8 / s));
  double at_ref = std::numeric_limits<double>::quiet_NaN();
  for (int j = 0; j < g.n_r; ++j) {
    if (g.levels[j] <= rho_ref && rho_ref <= g.levels[j + 1]) {
      const double t = (rho_ref - g.levels[j]) / (g.levels[j + 1] - g.levels[j]);
      const double a0 = j == 0 ? grad_norm(grad[0]) : ring_mean(j);
      at_ref = (1.0 - t) * a0 + t * ring_mean(j + 1);
      break;
    }
  }
  const double edge = ring_mean(g.n_r - 1);
  const double ratio = edge / at_ref;

  rec.add("annulus_nodes", annulus);
  rec.add("min_ratio", annulus ? min_ratio : std::numeric_limits<double>::quiet_NaN());
  rec.add("monotonicity_breaks", breaks);
  rec.add("grad_edge_ring", edge);
  rec.add("grad_at_h_0.2", at_ref);
  rec.add("edge_over_h_0.2", ratio);
  rec.passed = annulus > 0 && min_ratio > c_audit && breaks == 0 && ratio >= blowup_ratio;
  return rec;
}

CheckRecord check_eta_exponent(const DualField& field, const DualField& u0_star, double m_alpha, double h_max,
                               double margin) {
  CheckRecord rec;
  rec.name = "eta_exponent";
  rec.anchor = "eta = u0* - u* < C h^m_alpha";
  rec.threshold = m_alpha - margin;
  rec.threshold_rule = "least-squares slope of log eta against log h >= m_alpha - 0.1";
  const BallGrid& g = *field.grid;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int p = 0; p < g.node_count(); ++p) {
    if (g.boundary[p]) continue;
    const double h = h_of(g, p, field.param);
    const double eta = u0_star.values[p] - field.values[p];
    if (!(h < h_max) || !(eta > 0.0)) continue;
    const double lx = std::log(h), ly = std::log(eta);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    ++cnt;
  }
  const double den = cnt * sxx - sx * sx;
  const double slope = cnt >= 2 && den > 0.0 ? (cnt * sxy - sx * sy) / den : std::numeric_limits<double>::quiet_NaN();
  rec.add("fit_nodes", cnt);
  rec.add("m_alpha", m_alpha);
  rec.add("slope", slope);
  rec.passed = slope >= m_alpha - margin;
  return rec;
}

CheckRecord check_pogorelov_dual(const std::vector<DualField>& fields, const DualField& u0_star,
                                 const PogorelovDualQuantity& q_in, double tol) {
  CheckRecord rec;
  rec.name = "pogorelov_dual";
  rec.anchor = "eta^beta u*_zz bounded independently of s";
  rec.threshold = tol;
  rec.threshold_rule = "relative variation of max eta^beta u*_zz over the last three s values";

  PogorelovDualQuantity q = q_in;
  std::vector<FieldGeometry> geos;
  geos.reserve(fields.size());
  for (const auto& f : fields) geos.emplace_back(f);
  if (!(q.m0 > 0.0)) {
    double m = 0.0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const BallGrid& g = *fields[i].grid;
      for (int p = 0; p < g.node_count(); ++p) {
        const double h = h_of(g, p, fields[i].param);
        const double d2 = std::pow(grad_norm(geos[i].gradient()[p]), 2);
        m = std::max({m, h * h * d2, h * h * h * h * d2});
      }
    }
    q.m0 = 1.01 * m + std::numeric_limits<double>::min();
  }
  q.M = 13.0 * q.m0 + q.N;
  rec.add("m_alpha", q.m_alpha);
  rec.add("beta", q.beta);
  rec.add("m0", q.m0);
  rec.add("M", q.M);

  std::vector<double> plain;
  double best = -kInf;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& f = fields[i];
    const BallGrid& g = *f.grid;
    const auto& H = geos[i].hessian();
    const int W = std::max(g.stencil_width, 1);
    double m = -kInf, mt = -kInf;
    int arg = 0;
    for (int p = 0; p < g.node_count(); ++p) {
      if (g.boundary[p]) continue;
      const double eta = u0_star.values[p] - f.values[p];
      if (!(eta > 0.0)) continue;
      const double h = h_of(g, p, f.param);
      const double gg = std::pow(h, 4) * std::pow(grad_norm(geos[i].gradient()[p]), 2);
      const double w = std::pow(eta, q.beta);
      double dmax = -kInf;
      for (int d = 0; d < W; ++d) {
        const double psi = std::numbers::pi * d / W;
        dmax = std::max(dmax, directional_second(psi, H.hrr[p], H.hrt[p], H.htt[p]));
      }
      const double v = w * dmax;
      if (v > m) m = v, arg = p;
      mt = std::max(mt, v / (1.0 - gg / q.M));
    }
    plain.push_back(m);
    rec.add(param_key("max_eta_beta_uzz", f.param), m);
    rec.add(param_key("max_test_value", f.param), mt);
    if (m > best) {
      best = m;
      mark_worst(rec, g, arg);
    }
  }
  const double var = relative_variation(last_three(plain));
  rec.add("variation", var);
  rec.passed = fields.size() >= 3 && var <= tol;
  return rec;
}

CheckRecord check_primal_pogorelov(const PrimalSurface& coarse, const PrimalSurface& fine, double tol) {
  CheckRecord rec;
  rec.name = "primal_pogorelov";
  rec.anchor = "(cutoff - u) kappa_max bounded on {u <= cutoff}";
  rec.threshold = tol;
  rec.threshold_rule = "finite maxima changing by at most 20% under 2x refinement";

  auto min_u = [](const PrimalSurface& s) {
    double m = kInf;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (!s.boundary_supported[i]) m = std::min(m, s.u[i]);
    return m;
  };
  auto quantity = [](const PrimalSurface& s, double cutoff, std::size_t& arg) {
    double m = 0.0;
    arg = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.boundary_supported[i] || !(s.u[i] <= cutoff)) continue;
      const double kmax = std::max(s.kappa[i][0], s.kappa[i][1]);
      const double v = (cutoff - s.u[i]) * kmax;
      if (v > m) m = v, arg = i;
    }
    return m;
  };

  const double mu = min_u(fine);
  rec.add("min_u", mu);
  bool ok = std::isfinite(mu) && mu > 0.0;
  double worst_change = 0.0;
  for (double factor : {2.0, 4.0, 8.0}) {
    const double cutoff = factor * mu;
    std::size_t ac = 0, af = 0;
    const double qc = quantity(coarse, cutoff, ac);
    const double qf = quantity(fine, cutoff, af);
    const double change = qf != 0.0 ? std::abs(qf - qc) / std::abs(qf) : std::abs(qc);
    std::ostringstream key;
    key << "cutoff_x" << factor;
    rec.add(key.str() + ".coarse", qc);
    rec.add(key.str() + ".fine", qf);
    rec.add(key.str() + ".change", change);
    ok = ok && std::isfinite(qc) && std::isfinite(qf);
    if (change >= worst_change) {
      worst_change = change;
      mark_worst(rec, fine, af);
    }
  }
  rec.add("max_change", worst_change);
  rec.passed = ok && worst_change <= tol;
  return rec;
}

CheckRecord check_gradient_estimate_bp(const PrimalSurface& u, const PrimalSurface& upper,
                                       const PrimalSurface& sub, const PrimalSurface& sub1,
                                       const DualField& sub_dual, const DualField& sub1_dual) {
  CheckRecord rec;
  rec.name = "gradient_estimate_bp";
  rec.anchor = "1/sqrt(1-|Du|^2) <= sup_{u>Psi}((ubar-Psi)/sqrt(1-|DPsi|^2))/(u-Psi), Psi = sub1 + delta";
  rec.threshold = 0.0;
  rec.threshold_rule = "bound holds at every sample of {u > Psi}; dual ordering of the subsolutions; Psi > ubar on the outermost sampled circle";

  const std::size_t S = u.size();

  // Dual ordering: the 1/100 right-hand side puts sub1* above sub*.
  const BallGrid& g = *sub_dual.grid;
  double dual_gap = kInf;
  for (int p = 0; p < g.node_count(); ++p) {
    if (g.boundary[p]) continue;
    dual_gap = std::min(dual_gap, sub1_dual.values[p] - sub_dual.values[p]);
  }
  rec.add("min_dual_gap", dual_gap);

  // δ from the samples where both subsolutions are resolved by interior nodes.
  double gap = kInf;
  int resolved = 0;
  for (std::size_t i = 0; i < S; ++i) {
    if (sub.boundary_supported[i] || sub1.boundary_supported[i]) continue;
    ++resolved;
    gap = std::min(gap, sub.u[i] - sub1.u[i]);
  }
  const double delta = 0.5 * gap;
  rec.add("resolved_samples", resolved);
  rec.add("min_primal_gap", gap);
  rec.add("delta", delta);

  auto psi = [&](std::size_t i) { return sub1.u[i] + delta; };
  auto in_region = [&](std::size_t i) { return !u.boundary_supported[i] && u.u[i] > psi(i); };
  double sup = -kInf;
  int region = 0, sup_samples = 0;
  for (std::size_t i = 0; i < S; ++i) {
    if (!in_region(i)) continue;
    ++region;
    if (sub1.boundary_supported[i]) continue;
    ++sup_samples;
    const double dpsi2 = sub1.dux[i] * sub1.dux[i] + sub1.duy[i] * sub1.duy[i];
    sup = std::max(sup, (upper.u[i] - psi(i)) / std::sqrt(1.0 - dpsi2));
  }
  rec.add("region_samples", region);
  rec.add("sup_samples", sup_samples);
  rec.add("sup_weighted_gap", sup);

  double worst = kInf;
  int violations = 0;
  for (std::size_t i = 0; i < S; ++i) {
    if (!in_region(i)) continue;
    const double du2 = u.dux[i] * u.dux[i] + u.duy[i] * u.duy[i];
    const double lhs = 1.0 / std::sqrt(1.0 - du2);
    const double rhs = sup / (u.u[i] - psi(i));
    const double margin = (rhs - lhs) / rhs;
    if (lhs > rhs) ++violations;
    if (margin < worst) {
      worst = margin;
      mark_worst(rec, u, i);
    }
  }
  rec.add("min_relative_margin", worst);
  rec.add("violations", violations);

  // K' = {Psi <= ubar} from values alone, which boundary-supported samples
  // still carry.
  double rmax = 0.0, outer = 0.0;
  for (std::size_t i = 0; i < S; ++i) outer = std::max(outer, std::hypot(u.x[i], u.y[i]));
  double outer_min = kInf;
  for (std::size_t i = 0; i < S; ++i) {
    const double r = std::hypot(u.x[i], u.y[i]);
    const double d = psi(i) - upper.u[i];
    if (d <= 0.0) rmax = std::max(rmax, r);
    if (r >= outer * (1.0 - 1e-12)) outer_min = std::min(outer_min, d);
  }
  rec.add("k_prime_radius", rmax);
  rec.add("outer_radius", outer);
  rec.add("outer_min_psi_minus_ubar", outer_min);

  rec.passed = dual_gap > 0.0 && gap > 0.0 && sup_samples > 0 && violations == 0 && outer_min > 0.0;
  return rec;
}

CheckRecord check_quotient_residual_hyperbolic(const DualField& field, const ProblemSpec& spec, double tol,
                                               double lambda_slack) {
  CheckRecord rec;
  rec.name = "quotient_residual_hyperbolic";
  rec.anchor = "sigma_n/sigma_{n-k}(lambda) = (-v)^-alpha and lambda_max reached near the boundary";
  rec.threshold = tol;
  rec.threshold_rule = "relative identity residual at interior nodes; interior lambda_max <= (1 + 0.05) edge lambda_max";
  const BallGrid& g = *field.grid;
  FieldGeometry geo(field);
  double worst = 0.0, lam_in = 0.0, lam_edge = 0.0;
  int singular = 0;
  for (int p = 0; p < g.node_count(); ++p) {
    if (g.boundary[p]) continue;
    std::array<double, 2> lam;
    try {
      lam = geo.curvature_radii(p);
    } catch (const Error&) {
      ++singular;
      continue;
    }
    const std::vector<double> lv{lam[0], lam[1]};
    const double target = std::pow(-geo.support_v(p), -spec.alpha);
    const double res = std::abs(sigma_quotient(lv, spec.k) - target) / target;
    if (res > worst) {
      worst = res;
      mark_worst(rec, g, p);
    }
    double& slot = g.ring_of(p) == g.n_r - 1 ? lam_edge : lam_in;
    slot = std::max(slot, lam[1]);
  }
  rec.add("max_relative_residual", worst);
  rec.add("singular_nodes", singular);
  rec.add("lambda_max_interior", lam_in);
  rec.add("lambda_max_edge_ring", lam_edge);
  rec.passed = singular == 0 && worst <= tol && lam_in <= lam_edge * (1.0 + lambda_slack);
  return rec;
}

CheckRecord check_primal_certificate(const PrimalSurface& s, const ProblemSpec& spec, double xi_max, double tol) {
  CheckRecord rec;
  rec.name = "primal_certificate";
  rec.anchor = "spacelike, convex, Maclaurin and sigma_k(kappa) = (-v)^alpha on the reconstruction";
  rec.threshold = tol;
  rec.threshold_rule = "|Du| <= 1-1e-6, kappa > 0, Maclaurin, |residual| <= tol where |xi| <= xi_max";
  const auto res = primal_residual(s, spec);
  const double cnk = binomial(spec.n, spec.k);
  double max_grad = 0.0, min_kappa = kInf, max_res = 0.0, maclaurin_gap = kInf;
  int used = 0, residual_samples = 0, excluded = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.boundary_supported[i]) {
      ++excluded;
      continue;
    }
    ++used;
    max_grad = std::max(max_grad, std::hypot(s.dux[i], s.duy[i]));
    min_kappa = std::min({min_kappa, s.kappa[i][0], s.kappa[i][1]});
    const std::vector<double> kap{s.kappa[i][0], s.kappa[i][1]};
    const double lhs = sigma_k(kap, spec.k) / cnk;
    const double rhs = std::pow(sigma_k(kap, spec.n), static_cast<double>(spec.k) / spec.n);
    maclaurin_gap = std::min(maclaurin_gap, (lhs - rhs) / std::max(std::abs(lhs), 1e-300));
    if (s.xi_norm[i] <= xi_max) {
      ++residual_samples;
      if (std::abs(res[i]) > max_res) {
        max_res = std::abs(res[i]);
        mark_worst(rec, s, i);
      }
    }
  }
  rec.add("samples", used);
  rec.add("boundary_supported", excluded);
  rec.add("max_grad", max_grad);
  rec.add("min_kappa", min_kappa);
  rec.add("min_maclaurin_gap", maclaurin_gap);
  rec.add("residual_samples", residual_samples);
  rec.add("max_abs_residual", max_res);
  rec.passed = used > 0 && max_grad <= 1.0 - 1e-6 && min_kappa > 0.0 && maclaurin_gap >= -1e-12 &&
               max_res <= tol;
  return rec;
}

CheckRecord check_rhs_monotonicity(const std::vector<DualField>& fields, const ProblemSpec& spec) {
  CheckRecord rec;
  rec.name = "rhs_monotonicity";
  rec.anchor = "d/du* of w*^alpha (-u*)^-alpha is positive";
  rec.threshold = 0.0;
  rec.threshold_rule = "alpha w*^alpha (-u*)^(-alpha-1) > 0 at every interior node";
  double m = kInf;
  int checked = 0;
  for (const auto& f : fields) {
    const BallGrid& g = *f.grid;
    for (int p = 0; p < g.node_count(); ++p) {
      if (g.boundary[p]) continue;
      ++checked;
      const double u = f.values[p];
      const double w = w_star(g.x[p], g.y[p]);
      const double d = u < 0.0 ? spec.alpha * std::pow(w, spec.alpha) * std::pow(-u, -spec.alpha - 1.0)
                               : -kInf;
      if (d < m) {
        m = d;
        mark_worst(rec, g, p);
      }
    }
  }
  rec.add("checked_nodes", checked);
  rec.add("min_derivative", m);
  rec.passed = checked > 0 && m > 0.0;
  return rec;
}

CheckRecord check_psi_barrier(const PsiBarrier& psi) {
  CheckRecord rec;
  rec.name = "psi_barrier";
  rec.anchor = "det D^2 psi > (ks)^2 h^-2 away from the boundary layer";
  rec.threshold = 1.0;
  rec.threshold_rule = "min det ratio > 1 on every checked node";
  rec.add("kcoef", psi.kcoef);
  rec.add("gradient_bound", psi.gradient_bound);
  rec.add("checked_nodes", psi.checked_nodes);
  rec.add("violations", psi.violations);
  rec.add("min_det_ratio", psi.min_det_ratio);
  rec.passed = psi.checked_nodes > 0 && psi.violations == 0;
  return rec;
}

CheckRecord check_supersolution(const Supersolution& sup) {
  CheckRecord rec;
  rec.name = "supersolution";
  rec.anchor = "rho Phi convex with det D^2(rho Phi) below the lower right-hand side bound";
  rec.threshold = 1.0;
  rec.threshold_rule = "blend convex, operator ratio <= 1, boundary gradient increasing as s -> 1";
  rec.add("rho", sup.rho);
  rec.add("delta0", sup.phi.delta0());
  rec.add("monotone_blend", sup.phi.monotone_blend() ? 1.0 : 0.0);
  rec.add("blend_min_eigenvalue", sup.blend_min_eigenvalue);
  rec.add("max_operator_ratio", sup.max_operator_ratio);
  bool increasing = !sup.certificate.empty();
  for (std::size_t i = 0; i < sup.certificate.size(); ++i) {
    rec.add(param_key("blowup_gradient", sup.certificate[i].s), sup.certificate[i].gradient);
    if (i > 0 && !(sup.certificate[i].gradient > sup.certificate[i - 1].gradient)) increasing = false;
  }
  rec.passed = sup.blend_min_eigenvalue > 0.0 && sup.max_operator_ratio <= 1.0 && increasing;
  return rec;
}

}  // namespace expander
