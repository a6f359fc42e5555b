#pragma once

// Dense double-precision inner loops shared by the simplex solver, strategy
// enumeration and the postselection search.
//
// Every kernel has a scalar reference implementation and an optional SIMD
// variant (AVX2+FMA on x86-64, NEON on AArch64). The variant is picked once at
// startup from CPU feature detection; BELLAUDIT_KERNEL=scalar|avx2|neon|auto
// overrides the choice. SIMD variants may differ from the scalar reference
// by summation order only.

#include <cstddef>
#include <span>
#include <string_view>

namespace bellaudit::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

// True when the variant is compiled in and supported by this CPU.
bool isa_available(Isa isa);

Isa active_isa();

// Selects a variant for subsequent calls. Throws DomainError if unavailable.
void set_active_isa(Isa isa);

// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);

// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// x[i] *= alpha
void scale(double alpha, std::span<double> x);

// out[r] = dot(row r of the row-major rows x cols matrix, v)
void gemv(std::span<const double> matrix, std::size_t rows, std::size_t cols,
          std::span<const double> v, std::span<double> out);

// Index of the first maximum; values must be non-empty.
std::size_t argmax(std::span<const double> values);

// Direct access to each variant for equivalence testing.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace neon
#endif

}  // namespace bellaudit::kernels
