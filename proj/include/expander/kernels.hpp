#pragma once

namespace expander::kernels {

/// Stencil weights for one interior ring of the polar grid.
///
/// Radial first and second derivatives use the nonuniform three-point
/// formulas on (inner, mid, outer); angular derivatives are centered.
struct RingCoeffs {
  double r_in = 0, r_mid = 0, r_out = 0;     // u_r weights
  double rr_in = 0, rr_mid = 0, rr_out = 0;  // u_rr weights
  double inv_r = 0, inv_r2 = 0;
  double inv_2dth = 0, inv_dth2 = 0;
};

RingCoeffs ring_coeffs(double r_in, double r_mid, double r_out, double dtheta);

/// Local-frame Hessian (radial-radial, radial-tangential, tangential-tangential)
/// of one ring. `in`, `mid`, `out` hold n + 2 values: index i + 1 is angle i,
/// with one periodic ghost on each side.
void ring_hessian(const double* in, const double* mid, const double* out, int n,
                  const RingCoeffs& c, double* hrr, double* hrt, double* htt);
void ring_hessian_scalar(const double* in, const double* mid, const double* out, int n,
                         const RingCoeffs& c, double* hrr, double* hrt, double* htt);

/// Direction pair table: e_j = (cos ψ_j, sin ψ_j) in the local frame with
/// ψ_j = jπ/(2W). Entries are cos², 2·cos·sin, sin².
struct PairTable {
  int width = 0;
  const double* cc = nullptr;
  const double* cs2 = nullptr;
  const double* ss = nullptr;
};

/// Per node: min over pairs of (Δ_e)₊(Δ_e⊥)₊ and the first index attaining it.
void min_pair_product(const double* hrr, const double* hrt, const double* htt, int n,
                      const PairTable& pairs, double* value, int* active);
void min_pair_product_scalar(const double* hrr, const double* hrt, const double* htt, int n,
                             const PairTable& pairs, double* value, int* active);

bool simd_available();
/// When set, dispatch always selects the scalar reference kernels.
void set_force_scalar(bool v);
bool force_scalar();

}  // namespace expander::kernels
