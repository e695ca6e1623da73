#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "survshap/kernels.hpp"

namespace survshap::kernels {
namespace {

struct Table {
  void (*add)(std::span<double>, std::span<const double>);
  void (*axpy)(std::span<double>, double, std::span<const double>);
  void (*scale)(std::span<double>, double);
  double (*dot)(std::span<const double>, std::span<const double>);
  void (*exp_neg_scaled)(std::span<double>, std::span<const double>, double);
};

constexpr Table kScalar{scalar::add, scalar::axpy, scalar::scale, scalar::dot, scalar::exp_neg_scaled};
#if defined(SURVSHAP_HAVE_AVX2)
constexpr Table kAvx2{avx2::add, avx2::axpy, avx2::scale, avx2::dot, avx2::exp_neg_scaled};
#endif
#if defined(SURVSHAP_HAVE_NEON)
constexpr Table kNeon{neon::add, neon::axpy, neon::scale, neon::dot, neon::exp_neg_scaled};
#endif

const Table& table_for(Isa isa) {
  switch (isa) {
#if defined(SURVSHAP_HAVE_AVX2)
    case Isa::avx2:
      return kAvx2;
#endif
#if defined(SURVSHAP_HAVE_NEON)
    case Isa::neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

struct State {
  std::atomic<Isa> isa;
  std::atomic<const Table*> table;
  State() : isa(detected_isa()), table(&table_for(isa.load())) {}
};

State& state() {
  static State s;
  return s;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(SURVSHAP_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(SURVSHAP_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() {
  if (const char* env = std::getenv("SURVSHAP_ISA"); env != nullptr && std::string(env) == "scalar") {
    return Isa::scalar;
  }
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() { return state().isa.load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("instruction set not available: " + std::string(isa_name(isa)));
  }
  state().isa.store(isa);
  state().table.store(&table_for(isa));
}

void add(std::span<double> dst, std::span<const double> src) {
  state().table.load(std::memory_order_relaxed)->add(dst, src);
}
void axpy(std::span<double> dst, double a, std::span<const double> src) {
  state().table.load(std::memory_order_relaxed)->axpy(dst, a, src);
}
void scale(std::span<double> dst, double a) { state().table.load(std::memory_order_relaxed)->scale(dst, a); }
double dot(std::span<const double> a, std::span<const double> b) {
  return state().table.load(std::memory_order_relaxed)->dot(a, b);
}
void exp_neg_scaled(std::span<double> dst, std::span<const double> src, double r) {
  state().table.load(std::memory_order_relaxed)->exp_neg_scaled(dst, src, r);
}

}  // namespace survshap::kernels
