#include "mmla/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace mmla::kernels {
namespace {

double sum_neon(std::span<const double> x) {
  const double* p = x.data();
  const std::size_t n = x.size();
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vld1q_f64(p + i));
    acc1 = vaddq_f64(acc1, vld1q_f64(p + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += p[i];
  return s;
}

double sum_sq_dev_neon(std::span<const double> x, double mean) {
  const double* p = x.data();
  const std::size_t n = x.size();
  const float64x2_t m = vdupq_n_f64(mean);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vsubq_f64(vld1q_f64(p + i), m);
    acc = vaddq_f64(acc, vmulq_f64(d, d));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    double d = p[i] - mean;
    s += d * d;
  }
  return s;
}

CrossMoments cross_moments_neon(std::span<const double> x, std::span<const double> y, double mx,
                                double my) {
  const std::size_t n = x.size();
  const float64x2_t vmx = vdupq_n_f64(mx);
  const float64x2_t vmy = vdupq_n_f64(my);
  float64x2_t axy = vdupq_n_f64(0.0);
  float64x2_t axx = vdupq_n_f64(0.0);
  float64x2_t ayy = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t dx = vsubq_f64(vld1q_f64(x.data() + i), vmx);
    float64x2_t dy = vsubq_f64(vld1q_f64(y.data() + i), vmy);
    axy = vaddq_f64(axy, vmulq_f64(dx, dy));
    axx = vaddq_f64(axx, vmulq_f64(dx, dx));
    ayy = vaddq_f64(ayy, vmulq_f64(dy, dy));
  }
  CrossMoments m{vaddvq_f64(axy), vaddvq_f64(axx), vaddvq_f64(ayy)};
  for (; i < n; ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    m.sxy += dx * dy;
    m.sxx += dx * dx;
    m.syy += dy * dy;
  }
  return m;
}

MinMax min_max_neon(std::span<const double> x) {
  const double* p = x.data();
  const std::size_t n = x.size();
  MinMax r{p[0], p[0]};
  std::size_t i = 0;
  if (n >= 2) {
    float64x2_t lo = vld1q_f64(p);
    float64x2_t hi = lo;
    for (i = 2; i + 2 <= n; i += 2) {
      float64x2_t v = vld1q_f64(p + i);
      lo = vminq_f64(lo, v);
      hi = vmaxq_f64(hi, v);
    }
    r = {vminvq_f64(lo), vmaxvq_f64(hi)};
  }
  for (; i < n; ++i) {
    if (p[i] < r.min) r.min = p[i];
    if (p[i] > r.max) r.max = p[i];
  }
  return r;
}

void lerp_neon(const LerpBatch& b, std::span<double> out) {
  const std::size_t n = out.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t t = vld1q_f64(b.t.data() + i);
    float64x2_t t0 = vld1q_f64(b.t0.data() + i);
    float64x2_t t1 = vld1q_f64(b.t1.data() + i);
    float64x2_t v0 = vld1q_f64(b.v0.data() + i);
    float64x2_t v1 = vld1q_f64(b.v1.data() + i);
    float64x2_t frac = vdivq_f64(vsubq_f64(t, t0), vsubq_f64(t1, t0));
    // vmulq + vaddq rather than vfmaq to match the scalar rounding.
    vst1q_f64(out.data() + i, vaddq_f64(v0, vmulq_f64(vsubq_f64(v1, v0), frac)));
  }
  for (; i < n; ++i) {
    double frac = (b.t[i] - b.t0[i]) / (b.t1[i] - b.t0[i]);
    out[i] = b.v0[i] + (b.v1[i] - b.v0[i]) * frac;
  }
}

}  // namespace

const Table* neon() {
  static const Table table{"neon", sum_neon, sum_sq_dev_neon, cross_moments_neon, min_max_neon,
                           lerp_neon};
  return &table;
}

}  // namespace mmla::kernels

#else

namespace mmla::kernels {
const Table* neon() { return nullptr; }
}  // namespace mmla::kernels

#endif
