#include "bellaudit/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bellaudit/errors.hpp"

namespace bellaudit::correlations {

CorrelationTable::CorrelationTable(TableShape shape, std::vector<double> probs)
    : shape_(shape), probs_(std::move(probs)) {
  if (shape_.settings_a < 1 || shape_.settings_b < 1) throw ValidationError("tables need at least one setting per side");
  if (shape_.outcomes_a < 2 || shape_.outcomes_b < 2) throw ValidationError("tables need at least two outcomes per side");
  if (probs_.size() != shape_.size()) throw ShapeMismatch("probability count does not match table shape");

  const std::size_t block = shape_.outcomes_a * shape_.outcomes_b;
  const double skip_rescale = 4.0 * static_cast<double>(block + 1) * std::numeric_limits<double>::epsilon();
  for (std::size_t start = 0; start < probs_.size(); start += block) {
    double sum = 0.0;
    for (std::size_t k = start; k < start + block; ++k) {
      double& p = probs_[k];
      if (!std::isfinite(p)) throw ValidationError("non-finite probability");
      if (p < -kNegativeTolerance) throw ValidationError("negative probability " + std::to_string(p));
      if (p < 0.0) p = 0.0;
      sum += p;
    }
    if (std::abs(sum - 1.0) > kNormalizationTolerance) {
      const std::size_t xy = start / block;
      throw ValidationError("probabilities for setting pair (" + std::to_string(xy / shape_.settings_b) + ", " +
                            std::to_string(xy % shape_.settings_b) + ") sum to " + std::to_string(sum));
    }
    if (std::abs(sum - 1.0) > skip_rescale) {
      for (std::size_t k = start; k < start + block; ++k) probs_[k] /= sum;
    }
  }
}

CorrelationTable CorrelationTable::uniform(TableShape shape) {
  const double p = 1.0 / static_cast<double>(shape.outcomes_a * shape.outcomes_b);
  return {shape, std::vector<double>(shape.size(), p)};
}

double CorrelationTable::at(std::size_t x, std::size_t y, std::size_t a, std::size_t b) const {
  if (x >= shape_.settings_a || y >= shape_.settings_b || a >= shape_.outcomes_a || b >= shape_.outcomes_b) {
    throw ShapeMismatch("table index out of range");
  }
  return (*this)(x, y, a, b);
}

std::vector<double> CorrelationTable::marginal_a(std::size_t x, std::size_t y) const {
  if (x >= shape_.settings_a || y >= shape_.settings_b) throw ShapeMismatch("setting index out of range");
  std::vector<double> m(shape_.outcomes_a, 0.0);
  for (std::size_t a = 0; a < shape_.outcomes_a; ++a) {
    for (std::size_t b = 0; b < shape_.outcomes_b; ++b) m[a] += (*this)(x, y, a, b);
  }
  return m;
}

std::vector<double> CorrelationTable::marginal_b(std::size_t x, std::size_t y) const {
  if (x >= shape_.settings_a || y >= shape_.settings_b) throw ShapeMismatch("setting index out of range");
  std::vector<double> m(shape_.outcomes_b, 0.0);
  for (std::size_t a = 0; a < shape_.outcomes_a; ++a) {
    for (std::size_t b = 0; b < shape_.outcomes_b; ++b) m[b] += (*this)(x, y, a, b);
  }
  return m;
}

double CorrelationTable::correlator(std::size_t x, std::size_t y) const {
  if (!shape_.binary()) throw ShapeMismatch("correlators need binary outcomes on both sides");
  if (x >= shape_.settings_a || y >= shape_.settings_b) throw ShapeMismatch("setting index out of range");
  const auto& t = *this;
  return t(x, y, 0, 0) + t(x, y, 1, 1) - t(x, y, 0, 1) - t(x, y, 1, 0);
}

double max_abs_difference(const CorrelationTable& lhs, const CorrelationTable& rhs) {
  if (lhs.shape() != rhs.shape()) throw ShapeMismatch("tables have different shapes");
  double worst = 0.0;
  for (std::size_t k = 0; k < lhs.probs().size(); ++k) worst = std::max(worst, std::abs(lhs.probs()[k] - rhs.probs()[k]));
  return worst;
}

namespace {

double max_gap(const std::vector<double>& p, const std::vector<double>& q) {
  double worst = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) worst = std::max(worst, std::abs(p[k] - q[k]));
  return worst;
}

}  // namespace

NoSignalingReport no_signaling_check(const CorrelationTable& table, double tolerance) {
  const TableShape& s = table.shape();
  NoSignalingReport report;
  auto consider = [&](MarginalSide side, std::size_t own, std::size_t r1, std::size_t r2, double dev) {
    report.max_deviation = std::max(report.max_deviation, dev);
    if (dev > tolerance) report.violations.push_back({side, own, r1, r2, dev});
  };
  for (std::size_t x = 0; x < s.settings_a; ++x) {
    for (std::size_t y1 = 0; y1 < s.settings_b; ++y1) {
      for (std::size_t y2 = y1 + 1; y2 < s.settings_b; ++y2) {
        consider(MarginalSide::A, x, y1, y2, max_gap(table.marginal_a(x, y1), table.marginal_a(x, y2)));
      }
    }
  }
  for (std::size_t y = 0; y < s.settings_b; ++y) {
    for (std::size_t x1 = 0; x1 < s.settings_a; ++x1) {
      for (std::size_t x2 = x1 + 1; x2 < s.settings_a; ++x2) {
        consider(MarginalSide::B, y, x1, x2, max_gap(table.marginal_b(x1, y), table.marginal_b(x2, y)));
      }
    }
  }
  return report;
}

CorrelationTable swap_sides(const CorrelationTable& table) {
  const TableShape& s = table.shape();
  const TableShape swapped{s.settings_b, s.settings_a, s.outcomes_b, s.outcomes_a};
  std::vector<double> probs(s.size());
  for (std::size_t x = 0; x < s.settings_a; ++x)
    for (std::size_t y = 0; y < s.settings_b; ++y)
      for (std::size_t a = 0; a < s.outcomes_a; ++a)
        for (std::size_t b = 0; b < s.outcomes_b; ++b) probs[swapped.index(y, x, b, a)] = table(x, y, a, b);
  return {swapped, std::move(probs)};
}

CorrelationTable pr_box() {
  const TableShape shape{2, 2, 2, 2};
  std::vector<double> probs(shape.size(), 0.0);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) probs[shape.index(x, y, a, b)] = ((a ^ b) == (x & y)) ? 0.5 : 0.0;
  return {shape, std::move(probs)};
}

}  // namespace bellaudit::correlations
