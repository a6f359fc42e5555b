#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bellaudit::correlations {

// Dimensions of a bipartite scenario: settings per side and outcomes per side.
struct TableShape {
  std::size_t settings_a = 1;
  std::size_t settings_b = 1;
  std::size_t outcomes_a = 2;
  std::size_t outcomes_b = 2;

  std::size_t size() const { return settings_a * settings_b * outcomes_a * outcomes_b; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t a, std::size_t b) const {
    return ((x * settings_b + y) * outcomes_a + a) * outcomes_b + b;
  }
  bool binary() const { return outcomes_a == 2 && outcomes_b == 2; }
  bool operator==(const TableShape&) const = default;
};

// Conditional distribution P(a, b | x, y), stored flat in [x][y][a][b] order.
// Outcome index 0 is read as +1 and index 1 as -1 in correlators.
//
// Construction clamps entries in [-1e-12, 0) to zero, requires every (x, y)
// block to sum to 1 within 1e-9 and then rescales each block so it sums to 1
// to within a few ulps. Rescaling is skipped for blocks already that close,
// which keeps serialization round-trips bit-exact.
class CorrelationTable {
 public:
  static constexpr double kNormalizationTolerance = 1e-9;
  static constexpr double kNegativeTolerance = 1e-12;

  CorrelationTable(TableShape shape, std::vector<double> probs);

  static CorrelationTable uniform(TableShape shape);

  const TableShape& shape() const { return shape_; }
  std::span<const double> probs() const { return probs_; }

  double operator()(std::size_t x, std::size_t y, std::size_t a, std::size_t b) const {
    return probs_[shape_.index(x, y, a, b)];
  }

  // Index-checked access; throws ShapeMismatch.
  double at(std::size_t x, std::size_t y, std::size_t a, std::size_t b) const;

  std::vector<double> marginal_a(std::size_t x, std::size_t y) const;
  std::vector<double> marginal_b(std::size_t x, std::size_t y) const;

  // E(x, y) = P(00) + P(11) - P(01) - P(10). Binary outcomes only.
  double correlator(std::size_t x, std::size_t y) const;

 private:
  TableShape shape_;
  std::vector<double> probs_;
};

double max_abs_difference(const CorrelationTable& lhs, const CorrelationTable& rhs);

enum class MarginalSide { A, B };

struct SignalingViolation {
  // `side`'s marginal at its own setting `own_setting` changes between the
  // remote settings remote_1 and remote_2.
  MarginalSide side;
  std::size_t own_setting;
  std::size_t remote_1;
  std::size_t remote_2;
  double deviation;
};

struct NoSignalingReport {
  std::vector<SignalingViolation> violations;
  double max_deviation = 0.0;
  bool passes() const { return violations.empty(); }
};

// One violation per (side, own setting, remote pair) whose largest marginal
// difference exceeds `tolerance`.
NoSignalingReport no_signaling_check(const CorrelationTable& table, double tolerance = 1e-9);

// Table obtained by exchanging the roles of A and B.
CorrelationTable swap_sides(const CorrelationTable& table);

// Well-known reference tables (binary, two settings per side).
CorrelationTable pr_box();

}  // namespace bellaudit::correlations
