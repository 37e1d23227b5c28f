#include "mmla/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#define MMLA_AVX2 __attribute__((target("avx2")))

namespace mmla::kernels {
namespace {

MMLA_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

MMLA_AVX2 double sum_avx2(std::span<const double> x) {
  const double* p = x.data();
  const std::size_t n = x.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(p + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(p + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(p + i));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += p[i];
  return s;
}

MMLA_AVX2 double sum_sq_dev_avx2(std::span<const double> x, double mean) {
  const double* p = x.data();
  const std::size_t n = x.size();
  const __m256d m = _mm256_set1_pd(mean);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(p + i), m);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    double d = p[i] - mean;
    s += d * d;
  }
  return s;
}

MMLA_AVX2 CrossMoments cross_moments_avx2(std::span<const double> x, std::span<const double> y,
                                          double mx, double my) {
  const std::size_t n = x.size();
  const __m256d vmx = _mm256_set1_pd(mx);
  const __m256d vmy = _mm256_set1_pd(my);
  __m256d axy = _mm256_setzero_pd();
  __m256d axx = _mm256_setzero_pd();
  __m256d ayy = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), vmx);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y.data() + i), vmy);
    axy = _mm256_add_pd(axy, _mm256_mul_pd(dx, dy));
    axx = _mm256_add_pd(axx, _mm256_mul_pd(dx, dx));
    ayy = _mm256_add_pd(ayy, _mm256_mul_pd(dy, dy));
  }
  CrossMoments m{hsum(axy), hsum(axx), hsum(ayy)};
  for (; i < n; ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    m.sxy += dx * dy;
    m.sxx += dx * dx;
    m.syy += dy * dy;
  }
  return m;
}

MMLA_AVX2 MinMax min_max_avx2(std::span<const double> x) {
  const double* p = x.data();
  const std::size_t n = x.size();
  MinMax r{p[0], p[0]};
  std::size_t i = 0;
  if (n >= 4) {
    __m256d lo = _mm256_loadu_pd(p);
    __m256d hi = lo;
    for (i = 4; i + 4 <= n; i += 4) {
      __m256d v = _mm256_loadu_pd(p + i);
      lo = _mm256_min_pd(lo, v);
      hi = _mm256_max_pd(hi, v);
    }
    alignas(32) double l[4];
    alignas(32) double h[4];
    _mm256_store_pd(l, lo);
    _mm256_store_pd(h, hi);
    r = {l[0], h[0]};
    for (int k = 1; k < 4; ++k) {
      if (l[k] < r.min) r.min = l[k];
      if (h[k] > r.max) r.max = h[k];
    }
  }
  for (; i < n; ++i) {
    if (p[i] < r.min) r.min = p[i];
    if (p[i] > r.max) r.max = p[i];
  }
  return r;
}

// Same per-lane operation order as the scalar reference (no FMA), so results
// are bit-identical.
MMLA_AVX2 void lerp_avx2(const LerpBatch& b, std::span<double> out) {
  const std::size_t n = out.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_loadu_pd(b.t.data() + i);
    __m256d t0 = _mm256_loadu_pd(b.t0.data() + i);
    __m256d t1 = _mm256_loadu_pd(b.t1.data() + i);
    __m256d v0 = _mm256_loadu_pd(b.v0.data() + i);
    __m256d v1 = _mm256_loadu_pd(b.v1.data() + i);
    __m256d frac = _mm256_div_pd(_mm256_sub_pd(t, t0), _mm256_sub_pd(t1, t0));
    __m256d r = _mm256_add_pd(v0, _mm256_mul_pd(_mm256_sub_pd(v1, v0), frac));
    _mm256_storeu_pd(out.data() + i, r);
  }
  for (; i < n; ++i) {
    double frac = (b.t[i] - b.t0[i]) / (b.t1[i] - b.t0[i]);
    out[i] = b.v0[i] + (b.v1[i] - b.v0[i]) * frac;
  }
}

}  // namespace

const Table* avx2() {
  static const bool supported = __builtin_cpu_supports("avx2");
  static const Table table{"avx2", sum_avx2, sum_sq_dev_avx2, cross_moments_avx2, min_max_avx2,
                           lerp_avx2};
  return supported ? &table : nullptr;
}

}  // namespace mmla::kernels

#else

namespace mmla::kernels {
const Table* avx2() { return nullptr; }
}  // namespace mmla::kernels

#endif
