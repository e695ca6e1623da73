#include "survshap/kernels.hpp"

#include <immintrin.h>

#include <array>
#include <cassert>
#include <cmath>

namespace survshap::kernels::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

// Cephes-style exp: x = n*ln2 + r, |r| <= ln2/2, exp(r) from a (2,3) Pade
// form, then scaled by 2^n in two halves so subnormal results stay correct.
inline __m256d exp_pd(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-745.2);
  const __m256d hi = _mm256_set1_pd(709.78);
  const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(-745.13321910194122), _CMP_LT_OQ);
  x = _mm256_max_pd(_mm256_min_pd(x, hi), lo);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125E-1), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212E-6), r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000009E0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

  const __m256d n1 = _mm256_floor_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)));
  const __m256d n2 = _mm256_sub_pd(n, n1);
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 2^52 + 2^51
  const __m256i bias = _mm256_set1_epi64x(1023);
  auto pow2 = [&](__m256d k) {
    const __m256i bits = _mm256_castpd_si256(_mm256_add_pd(k, magic));
    return _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(bits, bias), 52));
  };
  e = _mm256_mul_pd(_mm256_mul_pd(e, pow2(n1)), pow2(n2));
  return _mm256_blendv_pd(e, _mm256_setzero_pd(), underflow);
}

}  // namespace

void add(std::span<double> dst, std::span<const double> src) {
  assert(dst.size() == src.size());
  const std::size_t n = dst.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(dst.data() + i,
                     _mm256_add_pd(_mm256_loadu_pd(dst.data() + i), _mm256_loadu_pd(src.data() + i)));
  }
  for (; i < n; ++i) dst[i] += src[i];
}

void axpy(std::span<double> dst, double a, std::span<const double> src) {
  assert(dst.size() == src.size());
  const std::size_t n = dst.size();
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(dst.data() + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(src.data() + i),
                                                      _mm256_loadu_pd(dst.data() + i)));
  }
  for (; i < n; ++i) dst[i] = std::fma(a, src[i], dst[i]);
}

void scale(std::span<double> dst, double a) {
  const std::size_t n = dst.size();
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(dst.data() + i, _mm256_mul_pd(va, _mm256_loadu_pd(dst.data() + i)));
  }
  for (; i < n; ++i) dst[i] *= a;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc);
  }
  alignas(32) std::array<double, kLanes> lanes{};
  _mm256_store_pd(lanes.data(), acc);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) total = std::fma(a[i], b[i], total);
  return total;
}

void exp_neg_scaled(std::span<double> dst, std::span<const double> src, double r) {
  assert(dst.size() == src.size());
  const std::size_t n = dst.size();
  const __m256d vr = _mm256_set1_pd(-r);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(dst.data() + i, exp_pd(_mm256_mul_pd(vr, _mm256_loadu_pd(src.data() + i))));
  }
  if (i < n) {
    alignas(32) std::array<double, kLanes> buf{};
    for (std::size_t k = 0; i + k < n; ++k) buf[k] = src[i + k];
    _mm256_store_pd(buf.data(), exp_pd(_mm256_mul_pd(vr, _mm256_load_pd(buf.data()))));
    for (std::size_t k = 0; i + k < n; ++k) dst[i + k] = buf[k];
  }
}

}  // namespace survshap::kernels::avx2
