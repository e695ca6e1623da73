#pragma once

// Elementwise arithmetic over time-grid vectors.
//
// Every hot loop in the toolkit reduces to a handful of operations on dense
// double vectors indexed by grid position: accumulating predicted curves,
// scaling them, and evaluating exp(-r * H(t)). Each operation has a scalar
// reference implementation and, where the CPU allows it, a SIMD variant
// selected once at runtime. The scalar versions are the definition; the SIMD
// versions are tested against them.
//
// Elementwise results never depend on an element's position in the array
// (tails are padded through the vector path), so evaluating a sub-grid yields
// exactly the restriction of the full-grid result.

#include <span>
#include <string_view>

namespace survshap::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// Best instruction set supported by this build and CPU. Honours the
/// SURVSHAP_ISA environment variable ("scalar" forces the reference path).
Isa detected_isa();

/// Instruction set the dispatching functions below currently route to.
Isa active_isa();

/// Overrides the dispatch target; throws std::invalid_argument when the
/// requested set is unavailable. Intended for tests and benchmarks.
void set_active_isa(Isa isa);

bool isa_available(Isa isa);

// dst[i] += src[i]
void add(std::span<double> dst, std::span<const double> src);
// dst[i] += a * src[i]
void axpy(std::span<double> dst, double a, std::span<const double> src);
// dst[i] *= a
void scale(std::span<double> dst, double a);
// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);
// dst[i] = exp(-r * src[i])
void exp_neg_scaled(std::span<double> dst, std::span<const double> src, double r);

namespace scalar {
void add(std::span<double> dst, std::span<const double> src);
void axpy(std::span<double> dst, double a, std::span<const double> src);
void scale(std::span<double> dst, double a);
double dot(std::span<const double> a, std::span<const double> b);
void exp_neg_scaled(std::span<double> dst, std::span<const double> src, double r);
}  // namespace scalar

#if defined(SURVSHAP_HAVE_AVX2)
namespace avx2 {
void add(std::span<double> dst, std::span<const double> src);
void axpy(std::span<double> dst, double a, std::span<const double> src);
void scale(std::span<double> dst, double a);
double dot(std::span<const double> a, std::span<const double> b);
void exp_neg_scaled(std::span<double> dst, std::span<const double> src, double r);
}  // namespace avx2
#endif

#if defined(SURVSHAP_HAVE_NEON)
namespace neon {
void add(std::span<double> dst, std::span<const double> src);
void axpy(std::span<double> dst, double a, std::span<const double> src);
void scale(std::span<double> dst, double a);
double dot(std::span<const double> a, std::span<const double> b);
void exp_neg_scaled(std::span<double> dst, std::span<const double> src, double r);
}  // namespace neon
#endif

}  // namespace survshap::kernels
