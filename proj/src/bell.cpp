#include "bellaudit/bell.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bellaudit/errors.hpp"
#include "bellaudit/kernels.hpp"
#include "bellaudit/optimize.hpp"

namespace bellaudit::bell {

BellExpression::BellExpression(std::string name, std::size_t settings_a, std::size_t settings_b,
                               std::vector<double> coefficients, double declared_local_bound)
    : name_(std::move(name)),
      settings_a_(settings_a),
      settings_b_(settings_b),
      coefficients_(std::move(coefficients)),
      declared_local_bound_(declared_local_bound) {
  if (settings_a_ == 0 || settings_b_ == 0) throw ValidationError("Bell expression needs settings on both sides");
  if (coefficients_.size() != settings_a_ * settings_b_) throw ShapeMismatch("coefficient matrix has the wrong size");
  if (std::all_of(coefficients_.begin(), coefficients_.end(), [](double c) { return c == 0.0; })) {
    throw ValidationError("Bell expression has no nonzero coefficient");
  }
}

BellExpression chsh() { return {"chsh", 2, 2, {1.0, 1.0, 1.0, -1.0}, 2.0}; }

BellExpression chained_expression(std::size_t n) {
  if (n < 2) throw DomainError("chained expression needs n >= 2");
  std::vector<double> c(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) c[k * n + k] = 1.0;
  for (std::size_t k = 0; k + 1 < n; ++k) c[(k + 1) * n + k] = 1.0;
  c[0 * n + (n - 1)] = -1.0;
  return {"chained-" + std::to_string(n), n, n, std::move(c), 2.0 * static_cast<double>(n) - 2.0};
}

double evaluate(const BellExpression& expr, const CorrelationTable& table) {
  const auto& shape = table.shape();
  if (!shape.binary()) throw ShapeMismatch("Bell expressions need binary outcomes");
  if (expr.settings_a() > shape.settings_a || expr.settings_b() > shape.settings_b) {
    throw ShapeMismatch("expression uses settings outside the table");
  }
  double sum = 0.0;
  for (std::size_t x = 0; x < expr.settings_a(); ++x) {
    for (std::size_t y = 0; y < expr.settings_b(); ++y) {
      const double c = expr.coefficient(x, y);
      if (c != 0.0) sum += c * table.correlator(x, y);
    }
  }
  return sum;
}

LocalBound local_bound_by_enumeration(const BellExpression& expr, std::size_t cap) {
  const std::size_t nx = expr.settings_a();
  const std::size_t ny = expr.settings_b();
  if (nx + ny >= 63 || (std::size_t{1} << (nx + ny)) > cap) {
    throw CapExceeded("instance too large for enumeration: 2^" + std::to_string(nx + ny) + " strategies");
  }
  const std::size_t count_a = std::size_t{1} << nx;
  const std::size_t count_b = std::size_t{1} << ny;

  // Row ib holds the +-1 responses of B strategy ib; digit 0 means +1 and
  // y = 0 is the most significant digit.
  std::vector<double> b_signs(count_b * ny);
  for (std::size_t ib = 0; ib < count_b; ++ib) {
    for (std::size_t y = 0; y < ny; ++y) {
      const std::size_t digit = (ib >> (ny - 1 - y)) & 1U;
      b_signs[ib * ny + y] = digit ? -1.0 : 1.0;
    }
  }

  std::vector<double> weights(ny);
  std::vector<double> values(count_b);
  double best = -INFINITY;
  std::size_t best_a = 0;
  std::size_t best_b = 0;
  for (std::size_t ia = 0; ia < count_a; ++ia) {
    std::fill(weights.begin(), weights.end(), 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      const double sign = ((ia >> (nx - 1 - x)) & 1U) ? -1.0 : 1.0;
      for (std::size_t y = 0; y < ny; ++y) weights[y] += sign * expr.coefficient(x, y);
    }
    kernels::gemv(b_signs, count_b, ny, weights, values);
    const std::size_t ib = kernels::argmax(values);
    if (values[ib] > best) {
      best = values[ib];
      best_a = ia;
      best_b = ib;
    }
  }

  LocalBound out{best, {}};
  out.witness.response_a.resize(nx);
  out.witness.response_b.resize(ny);
  for (std::size_t x = 0; x < nx; ++x) out.witness.response_a[x] = (best_a >> (nx - 1 - x)) & 1U;
  for (std::size_t y = 0; y < ny; ++y) out.witness.response_b[y] = (best_b >> (ny - 1 - y)) & 1U;
  return out;
}

double quantum_chained_value(std::size_t n) {
  if (n < 2) throw DomainError("chained expression needs n >= 2");
  const double dn = static_cast<double>(n);
  return 2.0 * dn * std::cos(std::numbers::pi / (2.0 * dn));
}

double critical_visibility(std::size_t n) {
  return (2.0 * static_cast<double>(n) - 2.0) / quantum_chained_value(n);
}

double chained_value_at_phases(std::size_t n, std::span<const double> phases_a, std::span<const double> phases_b) {
  if (n < 2) throw DomainError("chained expression needs n >= 2");
  if (phases_a.size() != n || phases_b.size() != n) throw ShapeMismatch("need n phases per side");
  const auto e = [&](std::size_t x, std::size_t y) { return std::cos(phases_a[x] + phases_b[y]); };
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += e(k, k);
  for (std::size_t k = 0; k + 1 < n; ++k) sum += e(k + 1, k);
  return sum - e(0, n - 1);
}

PhaseSettings optimize_chained_phases(std::size_t n, std::size_t restarts, std::uint64_t seed) {
  if (n < 2) throw DomainError("chained expression needs n >= 2");
  numeric::PatternSearchOptions options;
  options.lower = 0.0;
  options.upper = 2.0 * std::numbers::pi;
  options.min_step = 1e-11;
  options.max_evaluations_per_restart = 2'000'000;
  const auto objective = [n](std::span<const double> p) {
    return -chained_value_at_phases(n, p.first(n), p.subspan(n));
  };
  const numeric::MinimizeResult r = numeric::minimize_free(objective, 2 * n, restarts, seed, options);
  PhaseSettings out;
  out.phases_a.assign(r.point.begin(), r.point.begin() + static_cast<std::ptrdiff_t>(n));
  out.phases_b.assign(r.point.begin() + static_cast<std::ptrdiff_t>(n), r.point.end());
  out.value = -r.value;
  return out;
}

}  // namespace bellaudit::bell
