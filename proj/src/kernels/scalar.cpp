#include "survshap/kernels.hpp"

#include <cassert>
#include <cmath>

namespace survshap::kernels::scalar {

void add(std::span<double> dst, std::span<const double> src) {
  assert(dst.size() == src.size());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void axpy(std::span<double> dst, double a, std::span<const double> src) {
  assert(dst.size() == src.size());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
}

void scale(std::span<double> dst, double a) {
  for (double& v : dst) v *= a;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void exp_neg_scaled(std::span<double> dst, std::span<const double> src, double r) {
  assert(dst.size() == src.size());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::exp(-r * src[i]);
}

}  // namespace survshap::kernels::scalar
