#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

#include "bellaudit/errors.hpp"
#include "bellaudit/kernels.hpp"

namespace bellaudit::kernels {

namespace {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
};

constexpr KernelTable kScalarTable{scalar::dot, scalar::axpy, scalar::scale};
#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2Table{avx2::dot, avx2::axpy, avx2::scale};
#endif
#if defined(__aarch64__)
constexpr KernelTable kNeonTable{neon::dot, neon::axpy, neon::scale};
#endif

const KernelTable* table_for(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2:
      return &kAvx2Table;
#endif
#if defined(__aarch64__)
    case Isa::Neon:
      return &kNeonTable;
#endif
    default:
      return &kScalarTable;
  }
}

Isa detect_best() {
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa initial_isa() {
  const char* env = std::getenv("BELLAUDIT_KERNEL");
  if (env == nullptr) return detect_best();
  const std::string requested(env);
  if (requested == "scalar") return Isa::Scalar;
  if (requested == "avx2" && isa_available(Isa::Avx2)) return Isa::Avx2;
  if (requested == "neon" && isa_available(Isa::Neon)) return Isa::Neon;
  return detect_best();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

const KernelTable& current() { return *table_for(active().load(std::memory_order_relaxed)); }

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw ShapeMismatch("kernel operands differ in length");
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
    case Isa::Scalar:
      break;
  }
  return "scalar";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw DomainError("kernel variant not available on this CPU: " + std::string(isa_name(isa)));
  }
  active().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size());
  return current().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size());
  current().axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> x) { current().scale(alpha, x.data(), x.size()); }

void gemv(std::span<const double> matrix, std::size_t rows, std::size_t cols,
          std::span<const double> v, std::span<double> out) {
  if (matrix.size() != rows * cols || v.size() != cols || out.size() != rows) {
    throw ShapeMismatch("gemv operand shapes are inconsistent");
  }
  const KernelTable& k = current();
  for (std::size_t r = 0; r < rows; ++r) out[r] = k.dot(matrix.data() + r * cols, v.data(), cols);
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ShapeMismatch("argmax of an empty range");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace bellaudit::kernels
