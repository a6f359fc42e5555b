#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace bellaudit::numeric {

enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class ObjectiveSense { Minimize, Maximize };

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Dense linear program
//   optimize  objective . x
//   s.t.      constraints[i] . x  (sense_i)  rhs[i]
//             lower[j] <= x[j] <= upper[j]
// Empty bound vectors mean 0 <= x < inf.
struct LinearProgram {
  ObjectiveSense sense = ObjectiveSense::Maximize;
  std::vector<double> objective;
  std::vector<double> constraints;  // row-major, num_rows() x num_vars()
  std::vector<double> rhs;
  std::vector<RowSense> senses;
  std::vector<double> lower;
  std::vector<double> upper;

  explicit LinearProgram(std::size_t num_vars = 0, ObjectiveSense s = ObjectiveSense::Maximize)
      : sense(s), objective(num_vars, 0.0) {}

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return rhs.size(); }

  void add_row(std::span<const double> coefficients, RowSense row_sense, double value);
  void set_bounds(std::size_t var, double lo, double hi);

  double lower_bound(std::size_t var) const { return lower.empty() ? 0.0 : lower[var]; }
  double upper_bound(std::size_t var) const { return upper.empty() ? kInfinity : upper[var]; }

  // Throws ShapeMismatch when vector sizes disagree, ValidationError on
  // NaN entries or crossed bounds.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpOptions {
  double feasibility_tolerance = 1e-9;
  double pivot_tolerance = 1e-11;
  double optimality_tolerance = 1e-11;
  std::size_t max_iterations = 50'000'000;
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  // Optimal: d objective / d rhs[i] for every row.
  std::vector<double> duals;
  double dual_objective = 0.0;
  // Infeasible: multipliers y with y_i >= 0 on >= rows, y_i <= 0 on <= rows,
  // such that y.rhs exceeds the maximum of (y^T A) x over the variable box.
  std::vector<double> farkas;
  std::size_t iterations = 0;
};

// Two-phase dense tableau simplex with Bland's smallest-index rule.
LpResult solve_lp(const LinearProgram& lp, const LpOptions& options = {});

// y.rhs - max over the variable box of (y^T A) x; positive values certify
// infeasibility. Returns -inf when y has the wrong sign on some row.
double farkas_gap(const LinearProgram& lp, std::span<const double> y, double sign_tolerance = 1e-12);

}  // namespace bellaudit::numeric
