#include "expander/polar_stencil.hpp"

#include <cmath>
#include <map>

namespace expander {

PolarStencil::PolarStencil(const BallGrid& grid) : grid_(grid) {
  const int nt = grid_.n_theta;
  const int nr = grid_.n_r;
  const double dth = grid_.dtheta();
  rings_.assign(nr + 1, kernels::RingCoeffs{});
  for (int j = 1; j < nr; ++j) {
    rings_[j] = kernels::ring_coeffs(grid_.levels[j - 1], grid_.levels[j], grid_.levels[j + 1], dth);
  }

  offsets_.assign(grid_.node_count() + 1, 0);
  terms_.clear();

  // Center: Fourier modes 0 and 2 of ring 1 give the Cartesian Hessian.
  {
    const double r1 = grid_.levels[1];
    const double k = 1.0 / (nt * r1 * r1);
    terms_.push_back({0, -2.0 / (r1 * r1), 0.0, -2.0 / (r1 * r1)});
    for (int a = 0; a < nt; ++a) {
      const double c2 = std::cos(2.0 * grid_.angles[a]);
      const double s2 = std::sin(2.0 * grid_.angles[a]);
      terms_.push_back({grid_.index(1, a), 2.0 * k + 4.0 * k * c2, 4.0 * k * s2, 2.0 * k - 4.0 * k * c2});
    }
  }
  offsets_[1] = static_cast<int>(terms_.size());

  for (int p = 1; p < grid_.node_count(); ++p) {
    const int j = grid_.ring_of(p);
    if (j < nr) {
      const int a = grid_.angle_of(p);
      const auto& c = rings_[j];
      std::map<int, std::array<double, 3>> acc;
      auto add = [&](int q, double crr, double crt, double ctt) {
        auto& e = acc[q];
        e[0] += crr;
        e[1] += crt;
        e[2] += ctt;
      };
      const double wr[3] = {c.r_in, c.r_mid, c.r_out};
      const double wrr[3] = {c.rr_in, c.rr_mid, c.rr_out};
      for (int dj = -1; dj <= 1; ++dj) {
        const int jj = j + dj;
        auto node_at = [&](int aa) { return jj == 0 ? 0 : grid_.index(jj, aa); };
        add(node_at(a), wrr[dj + 1], 0.0, wr[dj + 1] * c.inv_r);
        add(node_at(a + 1), 0.0, wr[dj + 1] * c.inv_2dth * c.inv_r, 0.0);
        add(node_at(a - 1), 0.0, -wr[dj + 1] * c.inv_2dth * c.inv_r, 0.0);
      }
      add(grid_.index(j, a + 1), 0.0, -c.inv_2dth * c.inv_r2, c.inv_dth2 * c.inv_r2);
      add(grid_.index(j, a - 1), 0.0, c.inv_2dth * c.inv_r2, c.inv_dth2 * c.inv_r2);
      add(p, 0.0, 0.0, -2.0 * c.inv_dth2 * c.inv_r2);
      for (const auto& [q, e] : acc) terms_.push_back({q, e[0], e[1], e[2]});
    }
    offsets_[p + 1] = static_cast<int>(terms_.size());
  }
}

LocalHessian PolarStencil::hessian(const std::vector<double>& u) const {
  const int nt = grid_.n_theta;
  const int nr = grid_.n_r;
  const int count = grid_.node_count();
  LocalHessian H;
  H.hrr.assign(count, 0.0);
  H.hrt.assign(count, 0.0);
  H.htt.assign(count, 0.0);

  {
    const auto h0 = hessian_at(u, 0);
    H.hrr[0] = h0[0];
    H.hrt[0] = h0[1];
    H.htt[0] = h0[2];
  }

  std::vector<double> pin(nt + 2), pmid(nt + 2), pout(nt + 2);
  auto pad = [&](int j, std::vector<double>& dst) {
    if (j == 0) {
      std::fill(dst.begin(), dst.end(), u[0]);
      return;
    }
    const double* src = u.data() + grid_.index(j, 0);
    std::copy(src, src + nt, dst.begin() + 1);
    dst[0] = src[nt - 1];
    dst[nt + 1] = src[0];
  };
  pad(0, pin);
  pad(1, pmid);
  for (int j = 1; j < nr; ++j) {
    pad(j + 1, pout);
    const int base = grid_.index(j, 0);
    kernels::ring_hessian(pin.data(), pmid.data(), pout.data(), nt, rings_[j], H.hrr.data() + base,
                          H.hrt.data() + base, H.htt.data() + base);
    std::swap(pin, pmid);
    std::swap(pmid, pout);
  }
  return H;
}

std::array<double, 3> PolarStencil::hessian_at(const std::vector<double>& u, int node) const {
  // Rows annihilate constants; differencing against u[node] limits roundoff.
  std::array<double, 3> h{0.0, 0.0, 0.0};
  const double u0 = u[node];
  for (const StencilTerm* t = terms_begin(node); t != terms_end(node); ++t) {
    const double d = u[t->node] - u0;
    h[0] += t->crr * d;
    h[1] += t->crt * d;
    h[2] += t->ctt * d;
  }
  return h;
}

std::vector<std::array<double, 2>> PolarStencil::gradient(const std::vector<double>& u) const {
  const int nt = grid_.n_theta;
  const int nr = grid_.n_r;
  std::vector<std::array<double, 2>> g(grid_.node_count(), {0.0, 0.0});
  {
    double a1 = 0.0, b1 = 0.0;
    for (int a = 0; a < nt; ++a) {
      a1 += u[grid_.index(1, a)] * std::cos(grid_.angles[a]);
      b1 += u[grid_.index(1, a)] * std::sin(grid_.angles[a]);
    }
    g[0] = {2.0 * a1 / (nt * grid_.levels[1]), 2.0 * b1 / (nt * grid_.levels[1])};
  }
  const double h1 = grid_.levels[nr - 1] - grid_.levels[nr - 2];
  const double h2 = grid_.levels[nr] - grid_.levels[nr - 1];
  const double dth = grid_.dtheta();
  for (int j = 1; j <= nr; ++j) {
    for (int a = 0; a < nt; ++a) {
      const int p = grid_.index(j, a);
      const auto at = [&](int jj, int aa) { return jj == 0 ? u[0] : u[grid_.index(jj, aa)]; };
      double ur;
      if (j < nr) {
        const auto& c = rings_[j];
        ur = c.r_in * at(j - 1, a) + c.r_mid * u[p] + c.r_out * at(j + 1, a);
      } else {
        ur = at(nr - 2, a) * h2 / (h1 * (h1 + h2)) - at(nr - 1, a) * (h1 + h2) / (h1 * h2) +
             u[p] * (h1 + 2.0 * h2) / (h2 * (h1 + h2));
      }
      const double ut = (at(j, a + 1) - at(j, a - 1)) / (2.0 * dth * grid_.levels[j]);
      const double c = std::cos(grid_.angles[a]);
      const double s = std::sin(grid_.angles[a]);
      g[p] = {ur * c - ut * s, ur * s + ut * c};
    }
  }
  return g;
}

std::array<double, 3> to_cartesian(double frame, double hrr, double hrt, double htt) {
  const double c = std::cos(frame);
  const double s = std::sin(frame);
  return {c * c * hrr - 2.0 * c * s * hrt + s * s * htt,
          c * s * (hrr - htt) + (c * c - s * s) * hrt,
          s * s * hrr + 2.0 * c * s * hrt + c * c * htt};
}

double directional_second(double psi, double hrr, double hrt, double htt) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  return c * c * hrr + 2.0 * c * s * hrt + s * s * htt;
}

}  // namespace expander
