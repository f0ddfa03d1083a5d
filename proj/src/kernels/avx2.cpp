#include "rplab/kernels/kernels.hpp"

#include <immintrin.h>

#include <cstddef>

namespace rplab::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

bool compiled() { return true; }

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double weighted_sum_squares(std::span<const double> w, std::span<const double> x) {
  const std::size_t n = w.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x.data() + i);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w.data() + i), xv), xv, acc);
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += w[i] * x[i] * x[i];
  return total;
}

void diag_affine(std::span<double> out, std::span<const double> decay, std::span<const double> c,
                 std::span<const double> phi, std::span<const double> b, double s,
                 std::span<const double> g) {
  const std::size_t n = out.size();
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d drive = _mm256_fmadd_pd(sv, _mm256_loadu_pd(b.data() + i), _mm256_loadu_pd(g.data() + i));
    const __m256d lin = _mm256_mul_pd(_mm256_loadu_pd(decay.data() + i), _mm256_loadu_pd(c.data() + i));
    _mm256_storeu_pd(out.data() + i, _mm256_fmadd_pd(_mm256_loadu_pd(phi.data() + i), drive, lin));
  }
  for (; i < n; ++i) out[i] = decay[i] * c[i] + phi[i] * (s * b[i] + g[i]);
}

std::complex<double> diag_resolvent_sum(std::span<const double> num, std::span<const double> diag,
                                        std::complex<double> p) {
  const std::size_t n = num.size();
  const __m256d prv = _mm256_set1_pd(p.real());
  const __m256d pi2 = _mm256_set1_pd(p.imag() * p.imag());
  __m256d re = _mm256_setzero_pd();
  __m256d im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dr = _mm256_sub_pd(_mm256_loadu_pd(diag.data() + i), prv);
    const __m256d den = _mm256_fmadd_pd(dr, dr, pi2);
    const __m256d scale = _mm256_div_pd(_mm256_loadu_pd(num.data() + i), den);
    re = _mm256_fmadd_pd(scale, dr, re);
    im = _mm256_add_pd(im, scale);
  }
  double re_s = hsum(re);
  double im_s = hsum(im) * p.imag();
  for (; i < n; ++i) {
    const double dr = diag[i] - p.real();
    const double scale = num[i] / (dr * dr + p.imag() * p.imag());
    re_s += scale * dr;
    im_s += scale * p.imag();
  }
  return {re_s, im_s};
}

}  // namespace rplab::kernels::avx2
