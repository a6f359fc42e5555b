#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bellaudit/errors.hpp"
#include "bellaudit/kernels.hpp"

using namespace bellaudit;
namespace k = bellaudit::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(gen);
  return v;
}

double naive_dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

struct IsaGuard {
  k::Isa saved = k::active_isa();
  ~IsaGuard() { k::set_active_isa(saved); }
};

}  // namespace

TEST_CASE("scalar kernels match a long double reference") {
  std::mt19937_64 gen(1);
  for (std::size_t n : {0, 1, 3, 4, 7, 16, 33, 1000}) {
    const auto a = random_vector(n, gen);
    const auto b = random_vector(n, gen);
    CHECK(k::scalar::dot(a.data(), b.data(), n) == doctest::Approx(naive_dot(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("available SIMD variants agree with the scalar reference") {
  std::mt19937_64 gen(2);
#if defined(__x86_64__) || defined(_M_X64)
  if (!k::isa_available(k::Isa::Avx2)) {
    MESSAGE("AVX2 not available; equivalence test skipped");
    return;
  }
  for (std::size_t n = 0; n < 70; ++n) {
    const auto a = random_vector(n, gen);
    const auto b = random_vector(n, gen);
    const double ref = k::scalar::dot(a.data(), b.data(), n);
    const double simd = k::avx2::dot(a.data(), b.data(), n);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(ref - simd) <= 1e-14 * (mag + 1.0));

    auto y1 = b;
    auto y2 = b;
    k::scalar::axpy(0.37, a.data(), y1.data(), n);
    k::avx2::axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-15 * (std::abs(y1[i]) + 1.0));

    auto s1 = a;
    auto s2 = a;
    k::scalar::scale(-1.5, s1.data(), n);
    k::avx2::scale(-1.5, s2.data(), n);
    CHECK(s1 == s2);
  }
#elif defined(__aarch64__)
  for (std::size_t n = 0; n < 70; ++n) {
    const auto a = random_vector(n, gen);
    const auto b = random_vector(n, gen);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(k::scalar::dot(a.data(), b.data(), n) - k::neon::dot(a.data(), b.data(), n)) <= 1e-14 * (mag + 1.0));
  }
#endif
}

TEST_CASE("dispatched gemv and argmax give the same answer for every ISA") {
  IsaGuard guard;
  std::mt19937_64 gen(3);
  const std::size_t rows = 37, cols = 11;
  const auto m = random_vector(rows * cols, gen);
  const auto v = random_vector(cols, gen);
  std::vector<double> ref(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    ref[r] = naive_dot(std::vector<double>(m.begin() + r * cols, m.begin() + (r + 1) * cols), v);
  }
  for (k::Isa isa : {k::Isa::Scalar, k::Isa::Avx2, k::Isa::Neon}) {
    if (!k::isa_available(isa)) continue;
    CAPTURE(k::isa_name(isa));
    k::set_active_isa(isa);
    std::vector<double> out(rows);
    k::gemv(m, rows, cols, v, out);
    for (std::size_t r = 0; r < rows; ++r) CHECK(out[r] == doctest::Approx(ref[r]).epsilon(1e-13));
  }
}

TEST_CASE("argmax returns the first maximum") {
  const std::vector<double> v{1.0, 3.0, -2.0, 3.0};
  CHECK(k::argmax(v) == 1);
}

TEST_CASE("kernels reject mismatched sizes and unavailable variants") {
  std::vector<double> a(3), b(4);
  CHECK_THROWS_AS(k::dot(a, b), ShapeMismatch);
  std::vector<double> out(2);
  CHECK_THROWS_AS(k::gemv(b, 2, 3, a, out), ShapeMismatch);
#if defined(__x86_64__) || defined(_M_X64)
  CHECK_FALSE(k::isa_available(k::Isa::Neon));
  CHECK_THROWS_AS(k::set_active_isa(k::Isa::Neon), DomainError);
#endif
  CHECK(k::isa_available(k::Isa::Scalar));
}
