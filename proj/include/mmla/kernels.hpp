#pragma once

// Data-parallel inner loops shared by the analytics routines.
//
// Each kernel has a scalar reference implementation and, where the target
// supports it, a vector variant (AVX2 on x86-64, NEON on aarch64). The
// active variant is picked once at startup from the CPU features; setting
// MMLA_SIMD=scalar in the environment forces the reference path.
//
// Reductions in the vector variants use a different summation order than the
// scalar loop and therefore agree only to rounding. `lerp` performs the same
// operations per element in every variant and is bit-identical.

#include <cstddef>
#include <span>
#include <string_view>

namespace mmla::kernels {

struct CrossMoments {
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
};

struct MinMax {
  double min = 0.0;
  double max = 0.0;
};

// Lanes for a batched linear interpolation: out[i] = v0[i] + (v1[i] - v0[i]) *
// ((t[i] - t0[i]) / (t1[i] - t0[i])). Requires t1[i] != t0[i].
struct LerpBatch {
  std::span<const double> t;
  std::span<const double> t0;
  std::span<const double> t1;
  std::span<const double> v0;
  std::span<const double> v1;
};

struct Table {
  std::string_view name;
  double (*sum)(std::span<const double>);
  double (*sum_sq_dev)(std::span<const double>, double mean);
  CrossMoments (*cross_moments)(std::span<const double>, std::span<const double>, double mean_x,
                                double mean_y);
  MinMax (*min_max)(std::span<const double>);  // requires non-empty input
  void (*lerp)(const LerpBatch&, std::span<double> out);
};

const Table& scalar();
/// nullptr when the variant was not compiled in or the CPU lacks the feature.
const Table* avx2();
const Table* neon();

/// The table selected for this process.
const Table& active();

inline double sum(std::span<const double> x) { return active().sum(x); }
inline double sum_sq_dev(std::span<const double> x, double mean) { return active().sum_sq_dev(x, mean); }
inline CrossMoments cross_moments(std::span<const double> x, std::span<const double> y, double mx,
                                  double my) {
  return active().cross_moments(x, y, mx, my);
}
inline MinMax min_max(std::span<const double> x) { return active().min_max(x); }
inline void lerp(const LerpBatch& b, std::span<double> out) { active().lerp(b, out); }

}  // namespace mmla::kernels
