#include "expander/kernels.hpp"

#include <atomic>

#if defined(__x86_64__) || defined(__i386__)
#define EXPANDER_X86 1
#include <immintrin.h>
#endif

namespace expander::kernels {

static std::atomic<bool> g_force_scalar{false};

void set_force_scalar(bool v) { g_force_scalar.store(v, std::memory_order_relaxed); }
bool force_scalar() { return g_force_scalar.load(std::memory_order_relaxed); }

bool simd_available() {
#ifdef EXPANDER_X86
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

RingCoeffs ring_coeffs(double r_in, double r_mid, double r_out, double dtheta) {
  RingCoeffs c;
  const double dm = r_mid - r_in;
  const double dp = r_out - r_mid;
  c.r_in = -dp / (dm * (dm + dp));
  c.r_mid = (dp - dm) / (dm * dp);
  c.r_out = dm / (dp * (dm + dp));
  c.rr_in = 2.0 / (dm * (dm + dp));
  c.rr_mid = -2.0 / (dm * dp);
  c.rr_out = 2.0 / (dp * (dm + dp));
  c.inv_r = 1.0 / r_mid;
  c.inv_r2 = c.inv_r * c.inv_r;
  c.inv_2dth = 0.5 / dtheta;
  c.inv_dth2 = 1.0 / (dtheta * dtheta);
  return c;
}

void ring_hessian_scalar(const double* in, const double* mid, const double* out, int n,
                         const RingCoeffs& c, double* hrr, double* hrt, double* htt) {
  for (int i = 0; i < n; ++i) {
    // Weights sum to zero, so differences against the middle value keep
    // roundoff proportional to the increments rather than to u.
    const double ur_l = c.r_in * (in[i] - mid[i]) + c.r_out * (out[i] - mid[i]);
    const double ur_c = c.r_in * (in[i + 1] - mid[i + 1]) + c.r_out * (out[i + 1] - mid[i + 1]);
    const double ur_h = c.r_in * (in[i + 2] - mid[i + 2]) + c.r_out * (out[i + 2] - mid[i + 2]);
    const double urr = c.rr_in * (in[i + 1] - mid[i + 1]) + c.rr_out * (out[i + 1] - mid[i + 1]);
    const double ut = (mid[i + 2] - mid[i]) * c.inv_2dth;
    const double utt = ((mid[i + 2] - mid[i + 1]) + (mid[i] - mid[i + 1])) * c.inv_dth2;
    const double urt = (ur_h - ur_l) * c.inv_2dth;
    hrr[i] = urr;
    hrt[i] = urt * c.inv_r - ut * c.inv_r2;
    htt[i] = ur_c * c.inv_r + utt * c.inv_r2;
  }
}

void min_pair_product_scalar(const double* hrr, const double* hrt, const double* htt, int n,
                             const PairTable& pairs, double* value, int* active) {
  for (int i = 0; i < n; ++i) {
    const double tr = hrr[i] + htt[i];
    double best = 0.0;
    int arg = 0;
    for (int j = 0; j < pairs.width; ++j) {
      const double d = (pairs.cc[j] * hrr[i] + pairs.cs2[j] * hrt[i]) + pairs.ss[j] * htt[i];
      const double e = tr - d;
      const double p = (d > 0.0 ? d : 0.0) * (e > 0.0 ? e : 0.0);
      if (j == 0 || p < best) {
        best = p;
        arg = j;
      }
    }
    value[i] = best;
    active[i] = arg;
  }
}

#ifdef EXPANDER_X86
__attribute__((target("avx2")))
static inline __m256d radial_avx2(const double* in, const double* mid, const double* out, int k, __m256d w_in,
                                  __m256d w_out) {
  const __m256d m = _mm256_loadu_pd(mid + k);
  return _mm256_add_pd(_mm256_mul_pd(w_in, _mm256_sub_pd(_mm256_loadu_pd(in + k), m)),
                       _mm256_mul_pd(w_out, _mm256_sub_pd(_mm256_loadu_pd(out + k), m)));
}

__attribute__((target("avx2")))
static void ring_hessian_avx2(const double* in, const double* mid, const double* out, int n,
                              const RingCoeffs& c, double* hrr, double* hrt, double* htt) {
  const __m256d r_in = _mm256_set1_pd(c.r_in),
                r_out = _mm256_set1_pd(c.r_out);
  const __m256d rr_in = _mm256_set1_pd(c.rr_in),
                rr_out = _mm256_set1_pd(c.rr_out);
  const __m256d inv_r = _mm256_set1_pd(c.inv_r), inv_r2 = _mm256_set1_pd(c.inv_r2);
  const __m256d inv_2dth = _mm256_set1_pd(c.inv_2dth), inv_dth2 = _mm256_set1_pd(c.inv_dth2);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ur_l = radial_avx2(in, mid, out, i, r_in, r_out);
    const __m256d ur_c = radial_avx2(in, mid, out, i + 1, r_in, r_out);
    const __m256d ur_h = radial_avx2(in, mid, out, i + 2, r_in, r_out);
    const __m256d m_l = _mm256_loadu_pd(mid + i);
    const __m256d m_c = _mm256_loadu_pd(mid + i + 1);
    const __m256d m_h = _mm256_loadu_pd(mid + i + 2);
    const __m256d urr = radial_avx2(in, mid, out, i + 1, rr_in, rr_out);
    const __m256d ut = _mm256_mul_pd(_mm256_sub_pd(m_h, m_l), inv_2dth);
    const __m256d utt =
        _mm256_mul_pd(_mm256_add_pd(_mm256_sub_pd(m_h, m_c), _mm256_sub_pd(m_l, m_c)), inv_dth2);
    const __m256d urt = _mm256_mul_pd(_mm256_sub_pd(ur_h, ur_l), inv_2dth);
    _mm256_storeu_pd(hrr + i, urr);
    _mm256_storeu_pd(hrt + i, _mm256_sub_pd(_mm256_mul_pd(urt, inv_r), _mm256_mul_pd(ut, inv_r2)));
    _mm256_storeu_pd(htt + i,
                     _mm256_add_pd(_mm256_mul_pd(ur_c, inv_r), _mm256_mul_pd(utt, inv_r2)));
  }
  if (i < n) ring_hessian_scalar(in + i, mid + i, out + i, n - i, c, hrr + i, hrt + i, htt + i);
}

__attribute__((target("avx2")))
static void min_pair_product_avx2(const double* hrr, const double* hrt, const double* htt, int n,
                                  const PairTable& pairs, double* value, int* active) {
  const __m256d zero = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(hrr + i);
    const __m256d b = _mm256_loadu_pd(hrt + i);
    const __m256d t = _mm256_loadu_pd(htt + i);
    const __m256d tr = _mm256_add_pd(a, t);
    __m256d best = zero;
    __m256d arg = zero;
    for (int j = 0; j < pairs.width; ++j) {
      const __m256d d = _mm256_add_pd(
          _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(pairs.cc[j]), a),
                        _mm256_mul_pd(_mm256_set1_pd(pairs.cs2[j]), b)),
          _mm256_mul_pd(_mm256_set1_pd(pairs.ss[j]), t));
      const __m256d e = _mm256_sub_pd(tr, d);
      const __m256d p = _mm256_mul_pd(_mm256_max_pd(d, zero), _mm256_max_pd(e, zero));
      if (j == 0) {
        best = p;
      } else {
        const __m256d lt = _mm256_cmp_pd(p, best, _CMP_LT_OQ);
        best = _mm256_blendv_pd(best, p, lt);
        arg = _mm256_blendv_pd(arg, _mm256_set1_pd(static_cast<double>(j)), lt);
      }
    }
    _mm256_storeu_pd(value + i, best);
    alignas(32) double idx[4];
    _mm256_store_pd(idx, arg);
    for (int q = 0; q < 4; ++q) active[i + q] = static_cast<int>(idx[q]);
  }
  if (i < n) min_pair_product_scalar(hrr + i, hrt + i, htt + i, n - i, pairs, value + i, active + i);
}
#endif

void ring_hessian(const double* in, const double* mid, const double* out, int n,
                  const RingCoeffs& c, double* hrr, double* hrt, double* htt) {
#ifdef EXPANDER_X86
  if (!force_scalar() && simd_available()) {
    ring_hessian_avx2(in, mid, out, n, c, hrr, hrt, htt);
    return;
  }
#endif
  ring_hessian_scalar(in, mid, out, n, c, hrr, hrt, htt);
}

void min_pair_product(const double* hrr, const double* hrt, const double* htt, int n,
                      const PairTable& pairs, double* value, int* active) {
#ifdef EXPANDER_X86
  if (!force_scalar() && simd_available()) {
    min_pair_product_avx2(hrr, hrt, htt, n, pairs, value, active);
    return;
  }
#endif
  min_pair_product_scalar(hrr, hrt, htt, n, pairs, value, active);
}

}  // namespace expander::kernels
