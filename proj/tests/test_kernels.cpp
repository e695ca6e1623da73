#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "survshap/kernels.hpp"

namespace k = survshap::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

struct IsaGuard {
  k::Isa saved = k::active_isa();
  ~IsaGuard() { k::set_active_isa(saved); }
};

double ulp_distance(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::numeric_limits<double>::denorm_min(), std::abs(std::nextafter(a, b) - a));
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar is always available and selectable") {
    IsaGuard guard;
    CHECK(k::isa_available(k::Isa::scalar));
    k::set_active_isa(k::Isa::scalar);
    CHECK(k::active_isa() == k::Isa::scalar);
    CHECK(k::isa_name(k::Isa::scalar) == "scalar");
  }

  TEST_CASE("unavailable instruction sets are refused") {
    IsaGuard guard;
    for (k::Isa isa : {k::Isa::avx2, k::Isa::neon}) {
      if (!k::isa_available(isa)) CHECK_THROWS_AS(k::set_active_isa(isa), std::invalid_argument);
    }
  }

  TEST_CASE("SIMD variants match the scalar reference") {
    IsaGuard guard;
    std::vector<k::Isa> variants;
    for (k::Isa isa : {k::Isa::avx2, k::Isa::neon}) {
      if (k::isa_available(isa)) variants.push_back(isa);
    }
    if (variants.empty()) MESSAGE("no SIMD variant on this machine; dispatch covers the scalar path only");
    for (k::Isa isa : variants) {
      CAPTURE(k::isa_name(isa));
      // Lengths around the lane count exercise the padded tail.
      for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 100, 1001}) {
        CAPTURE(n);
        const auto a = random_vector(n, 1 + n, -3.0, 3.0);
        const auto b = random_vector(n, 1000 + n, -3.0, 3.0);
        const auto h = random_vector(n, 2000 + n, 0.0, 40.0);

        auto ref = a, got = a;
        k::scalar::add(ref, b);
        k::set_active_isa(isa);
        k::add(got, b);
        CHECK(ref == got);

        ref = a;
        got = a;
        k::scalar::axpy(ref, 0.37, b);
        k::axpy(got, 0.37, b);
        // FMA skips the rounding of 0.37 * b, so the gap scales with the inputs, not the result.
        for (std::size_t i = 0; i < n; ++i) {
          const double bound = 2 * std::numeric_limits<double>::epsilon() * (std::abs(a[i]) + std::abs(0.37 * b[i]));
          CHECK(std::abs(ref[i] - got[i]) <= bound);
        }

        ref = a;
        got = a;
        k::scalar::scale(ref, -1.75);
        k::scale(got, -1.75);
        CHECK(ref == got);

        const double dref = k::scalar::dot(a, b), dgot = k::dot(a, b);
        double mag = 0.0;
        for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
        CHECK(std::abs(dref - dgot) <= 1e-15 * (mag + 1.0) * static_cast<double>(n + 1));

        std::vector<double> eref(n), egot(n);
        for (double r : {0.0, 0.5, 3.0, 25.0}) {
          k::scalar::exp_neg_scaled(eref, h, r);
          k::exp_neg_scaled(egot, h, r);
          for (std::size_t i = 0; i < n; ++i) CHECK(ulp_distance(eref[i], egot[i]) <= 4.0);
        }
        k::set_active_isa(k::Isa::scalar);
      }
    }
  }

  TEST_CASE("exp handles extreme arguments like std::exp") {
    IsaGuard guard;
    const std::vector<double> h = {0.0, 1e-300, 700.0, 740.0, 745.0, 746.0, 1e6, INFINITY};
    std::vector<double> ref(h.size()), got(h.size());
    k::scalar::exp_neg_scaled(ref, h, 1.0);
    for (k::Isa isa : {k::Isa::avx2, k::Isa::neon}) {
      if (!k::isa_available(isa)) continue;
      k::set_active_isa(isa);
      k::exp_neg_scaled(got, h, 1.0);
      for (std::size_t i = 0; i < h.size(); ++i) {
        CAPTURE(h[i]);
        CHECK(got[i] >= 0.0);
        CHECK(ulp_distance(ref[i], got[i]) <= 4.0);
      }
    }
  }

  TEST_CASE("a sub-grid result is the restriction of the full-grid result") {
    IsaGuard guard;
    const auto h = random_vector(37, 9, 0.0, 5.0);
    std::vector<double> full(37);
    k::exp_neg_scaled(full, h, 1.3);
    for (std::size_t off : {0, 1, 3, 5}) {
      std::vector<double> part(37 - off);
      k::exp_neg_scaled(part, std::span<const double>(h).subspan(off), 1.3);
      for (std::size_t i = 0; i < part.size(); ++i) CHECK(part[i] == full[off + i]);
    }
  }
}
