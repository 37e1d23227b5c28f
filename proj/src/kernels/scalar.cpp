#include "mmla/kernels.hpp"

namespace mmla::kernels {
namespace {

double sum_scalar(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

double sum_sq_dev_scalar(std::span<const double> x, double mean) {
  double s = 0.0;
  for (double v : x) {
    double d = v - mean;
    s += d * d;
  }
  return s;
}

CrossMoments cross_moments_scalar(std::span<const double> x, std::span<const double> y, double mx,
                                  double my) {
  CrossMoments m;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    m.sxy += dx * dy;
    m.sxx += dx * dx;
    m.syy += dy * dy;
  }
  return m;
}

MinMax min_max_scalar(std::span<const double> x) {
  MinMax r{x[0], x[0]};
  for (double v : x.subspan(1)) {
    if (v < r.min) r.min = v;
    if (v > r.max) r.max = v;
  }
  return r;
}

void lerp_scalar(const LerpBatch& b, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    double frac = (b.t[i] - b.t0[i]) / (b.t1[i] - b.t0[i]);
    out[i] = b.v0[i] + (b.v1[i] - b.v0[i]) * frac;
  }
}

}  // namespace

const Table& scalar() {
  static const Table table{"scalar", sum_scalar, sum_sq_dev_scalar, cross_moments_scalar,
                           min_max_scalar, lerp_scalar};
  return table;
}

}  // namespace mmla::kernels
