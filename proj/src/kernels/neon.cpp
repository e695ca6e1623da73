#include "survshap/kernels.hpp"

#include <arm_neon.h>

#include <cassert>
#include <cmath>

// NEON has no vector exp; exp_neg_scaled runs the multiply in vector form and
// the exponential per lane.
namespace survshap::kernels::neon {

void add(std::span<double> dst, std::span<const double> src) {
  assert(dst.size() == src.size());
  const std::size_t n = dst.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst.data() + i, vaddq_f64(vld1q_f64(dst.data() + i), vld1q_f64(src.data() + i)));
  }
  for (; i < n; ++i) dst[i] += src[i];
}

void axpy(std::span<double> dst, double a, std::span<const double> src) {
  assert(dst.size() == src.size());
  const std::size_t n = dst.size();
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst.data() + i, vfmaq_f64(vld1q_f64(dst.data() + i), va, vld1q_f64(src.data() + i)));
  }
  for (; i < n; ++i) dst[i] = std::fma(a, src[i], dst[i]);
}

void scale(std::span<double> dst, double a) {
  const std::size_t n = dst.size();
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(dst.data() + i, vmulq_f64(vld1q_f64(dst.data() + i), va));
  for (; i < n; ++i) dst[i] *= a;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a.data() + i), vld1q_f64(b.data() + i));
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) total = std::fma(a[i], b[i], total);
  return total;
}

void exp_neg_scaled(std::span<double> dst, std::span<const double> src, double r) {
  assert(dst.size() == src.size());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::exp(-r * src[i]);
}

}  // namespace survshap::kernels::neon
