#include "expander/radial_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/numeric/odeint.hpp>

namespace expander {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;

// Thrown from the right-hand side when the trajectory leaves the admissible set.
struct Overshoot {
  bool nonelliptic = false;
};

// One radial model: state (u, flux) with flux = (u')^n (Gauss) or u' (quotient).
struct Model {
  int n = 2;
  double R = 1.0;
  std::function<double(double)> center_curvature;           // u''(0) given u(0)
  std::function<void(const State&, State&, double)> rhs;    // d/dr of the state
  std::function<double(const State&)> slope;                // u'
  std::function<double(double, const State&)> second;       // u'' for r > 0
  std::function<double(double, double, double)> flux_rate;  // flux' as a function of (r, u, u')
  std::function<double(double)> flux_of_slope;
};

constexpr double kTol = 1e-12;

State series_state(const Model& m, double c, double r) {
  const double a = m.center_curvature(c);
  const double up = a * r;
  return {c + 0.5 * a * r * r, m.flux_of_slope(up)};
}

double start_radius(const Model& m) { return 1e-4 * m.R; }

// u(R) for a center value c; +inf when the trajectory overshoots.
double shoot(const Model& m, double c) {
  try {
    State y = series_state(m, c, start_radius(m));
    auto stepper = odeint::make_controlled(kTol, kTol, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_adaptive(stepper, m.rhs, y, start_radius(m), m.R, 1e-3 * m.R);
    return y[0];
  } catch (const Overshoot&) {
    return std::numeric_limits<double>::infinity();
  }
}

double hermite(double t, double h, double y0, double y1, double d0, double d1) {
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

RadialProfile solve_model(const Model& m, double boundary_value, double param) {
  if (!(boundary_value < 0.0)) {
    std::ostringstream os;
    os << "boundary value " << boundary_value << " must be negative";
    throw Error(ErrorCode::NonnegativePotential, os.str());
  }
  auto mismatch = [&](double c) { return shoot(m, c) - boundary_value; };
  const double hi0 = boundary_value;
  double lo0 = boundary_value;
  const double step = 0.25 * std::max(1.0, std::abs(boundary_value));
  bool found = false;
  for (int j = 0; j < 60 && !found; ++j) {
    lo0 = boundary_value - step * std::exp2(j);
    found = mismatch(lo0) < 0.0;
  }
  if (!found || !(mismatch(hi0) > 0.0)) {
    std::ostringstream os;
    os << "no sign change of the shooting mismatch below boundary value " << boundary_value;
    throw Error(ErrorCode::BracketFailed, os.str());
  }

  RadialProfile P;
  P.n = m.n;
  P.param = param;
  P.radius = m.R;
  {
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 16; ++i) {
      const double v = mismatch(lo0 + (hi0 - lo0) * i / 16.0);
      if (v < prev) P.shooting_monotone = false;
      prev = v;
    }
  }
  double lo = lo0, hi = hi0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::abs(lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    (mismatch(mid) < 0.0 ? lo : hi) = mid;
  }
  const double c = 0.5 * (lo + hi);

  const int N = 4000;
  const double eps = start_radius(m);
  std::vector<double> times{eps};
  P.radii.push_back(0.0);
  for (int i = 1; i <= N; ++i) {
    const double t = static_cast<double>(i) / N;
    const double r = m.R * (1.0 - (1.0 - t) * (1.0 - t));
    if (r > eps) times.push_back(r);
  }
  std::vector<State> states;
  try {
    State y = series_state(m, c, eps);
    auto stepper = odeint::make_controlled(kTol, kTol, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_times(stepper, m.rhs, y, times.begin(), times.end(), 1e-3 * m.R,
                            [&](const State& s, double) { states.push_back(s); });
  } catch (const Overshoot& o) {
    std::ostringstream os;
    os << (o.nonelliptic ? "radial eigenvalue denominator nonpositive" : "potential reached zero")
       << " on the final profile";
    throw Error(o.nonelliptic ? ErrorCode::NonElliptic : ErrorCode::NonnegativePotential, os.str());
  }
  const double a = m.center_curvature(c);
  P.values.push_back(c);
  P.derivative.push_back(0.0);
  P.second.push_back(a);
  for (std::size_t i = 0; i < times.size(); ++i) {
    P.radii.push_back(times[i]);
    P.values.push_back(states[i][0]);
    P.derivative.push_back(m.slope(states[i]));
    P.second.push_back(m.second(times[i], states[i]));
  }

  // Simpson on each interval, midpoints from the Hermite interpolants of u and u'.
  for (std::size_t i = 1; i + 1 < P.radii.size(); ++i) {
    const double r0 = P.radii[i], r1 = P.radii[i + 1], h = r1 - r0;
    const double um = hermite(0.5, h, P.values[i], P.values[i + 1], P.derivative[i], P.derivative[i + 1]);
    const double upm = hermite(0.5, h, P.derivative[i], P.derivative[i + 1], P.second[i], P.second[i + 1]);
    const double f0 = m.flux_rate(r0, P.values[i], P.derivative[i]);
    const double fm = m.flux_rate(0.5 * (r0 + r1), um, upm);
    const double f1 = m.flux_rate(r1, P.values[i + 1], P.derivative[i + 1]);
    const double simpson = h / 6.0 * (f0 + 4.0 * fm + f1);
    const double dflux = m.flux_of_slope(P.derivative[i + 1]) - m.flux_of_slope(P.derivative[i]);
    const double scale = std::max({std::abs(dflux), std::abs(simpson), std::numeric_limits<double>::min()});
    P.max_residual = std::max(P.max_residual, std::abs(dflux - simpson) / scale);
  }
  return P;
}

}  // namespace

double RadialProfile::value(double r) const {
  r = std::clamp(r, 0.0, radius);
  auto it = std::upper_bound(radii.begin(), radii.end(), r);
  std::size_t i = it == radii.begin() ? 0 : static_cast<std::size_t>(it - radii.begin()) - 1;
  if (i + 1 >= radii.size()) i = radii.size() - 2;
  const double h = radii[i + 1] - radii[i];
  return hermite((r - radii[i]) / h, h, values[i], values[i + 1], derivative[i], derivative[i + 1]);
}

double RadialProfile::slope(double r) const {
  r = std::clamp(r, 0.0, radius);
  auto it = std::upper_bound(radii.begin(), radii.end(), r);
  std::size_t i = it == radii.begin() ? 0 : static_cast<std::size_t>(it - radii.begin()) - 1;
  if (i + 1 >= radii.size()) i = radii.size() - 2;
  const double h = radii[i + 1] - radii[i];
  return hermite((r - radii[i]) / h, h, derivative[i], derivative[i + 1], second[i], second[i + 1]);
}

RadialProfile solve_radial_gauss(int n, const GaussRhs& rhs, double s, double boundary_value, double R) {
  Model m;
  m.n = n;
  m.R = R;
  auto f = [=](double r, double u) {
    if (!(u < 0.0)) throw Overshoot{};
    return rhs.c * std::pow(1.0 - s * r * r, rhs.p) * std::pow(-u, -rhs.a);
  };
  m.center_curvature = [=](double c) { return std::pow(f(0.0, c), 1.0 / n); };
  m.rhs = [=](const State& y, State& dy, double r) {
    dy[0] = std::pow(std::max(y[1], 0.0), 1.0 / n);
    dy[1] = n * std::pow(r, n - 1) * f(r, y[0]);
  };
  m.slope = [=](const State& y) { return std::pow(std::max(y[1], 0.0), 1.0 / n); };
  m.second = [=](double r, const State& y) {
    const double up = std::pow(std::max(y[1], 0.0), 1.0 / n);
    return std::pow(r / up, n - 1) * f(r, y[0]);
  };
  m.flux_rate = [=](double r, double u, double) { return n * std::pow(r, n - 1) * f(r, u); };
  m.flux_of_slope = [=](double up) { return std::pow(up, n); };
  return solve_model(m, boundary_value, s);
}

RadialProfile solve_radial_gauss(int n, double alpha, double s, double boundary_value) {
  return solve_radial_gauss(n, GaussRhs{1.0, (alpha - n - 2.0) / 2.0, alpha}, s, boundary_value, 1.0);
}

RadialProfile solve_radial_quotient(int n, int k, const QuotientRhs& rhs, double r_ball, double boundary_value) {
  if (!(k >= 1 && k < n)) throw Error(ErrorCode::BadOrder, "radial quotient needs 1 <= k < n");
  if (!(r_ball > 0.0 && r_ball < 1.0)) throw Error(ErrorCode::OutsideBall, "radial quotient needs 0 < r_ball < 1");
  const double C1 = binomial(n - 1, n - k);
  const double C2 = binomial(n - 1, n - k - 1);
  const double Cnk = binomial(n, k);
  Model m;
  m.n = n;
  m.R = r_ball;
  auto g = [=](double r, double u) {
    if (!(u < 0.0)) throw Overshoot{};
    return rhs.coef * std::pow(std::sqrt(1.0 - r * r), rhs.wp) * std::pow(-u, -rhs.up);
  };
  auto lambda_rad = [=](double r, double u, double up) {
    const double w = std::sqrt(1.0 - r * r);
    const double b = w * up / r;
    const double gv = g(r, u);
    const double den = std::pow(b, k) - gv * C2;
    // A vanishing denominator is a finite-radius blow-up of u''; stop before
    // the step size collapses.
    if (!(b > 0.0) || !(den > 1e-9 * std::pow(b, k))) throw Overshoot{true};
    const double lam = gv * C1 * b / den;
    if (lam > 1e6) throw Overshoot{true};
    return lam;
  };
  auto upp = [=](double r, double u, double up) {
    const double w = std::sqrt(1.0 - r * r);
    return lambda_rad(r, u, up) / (w * w * w);
  };
  m.center_curvature = [=](double c) { return std::pow(Cnk * g(0.0, c), 1.0 / k); };
  m.rhs = [=](const State& y, State& dy, double r) {
    dy[0] = y[1];
    dy[1] = upp(r, y[0], y[1]);
  };
  m.slope = [](const State& y) { return y[1]; };
  m.second = [=](double r, const State& y) {
    try {
      return upp(r, y[0], y[1]);
    } catch (const Overshoot&) {
      throw Error(ErrorCode::NonElliptic, "radial eigenvalue denominator nonpositive on the final profile");
    }
  };
  m.flux_rate = upp;
  m.flux_of_slope = [](double up) { return up; };
  return solve_model(m, boundary_value, r_ball);
}

RadialProfile solve_radial_quotient(int n, int k, double alpha, double r_ball, double boundary_value) {
  return solve_radial_quotient(n, k, QuotientRhs{1.0, alpha, alpha}, r_ball, boundary_value);
}

RadialComparison compare_with_grid(const RadialProfile& profile, const DualField& field) {
  const BallGrid& g = *field.grid;
  RadialComparison out;
  double num = 0.0, den = 0.0;
  for (int p = 0; p < g.node_count(); ++p) {
    const double ref = profile.value(g.rho[p]);
    const double d = field.values[p] - ref;
    num += d * d;
    den += ref * ref;
    const double rel = std::abs(d) / std::abs(ref);
    if (out.worst_node < 0 || rel > out.max_rel) {
      out.max_rel = rel;
      out.worst_node = p;
    }
  }
  out.l2_rel = den > 0.0 ? std::sqrt(num / den) : 0.0;
  return out;
}

}  // namespace expander
