#include "bellaudit/lp.hpp"

#include <algorithm>
#include <cmath>

#include "bellaudit/errors.hpp"
#include "bellaudit/kernels.hpp"

namespace bellaudit::numeric {

void LinearProgram::add_row(std::span<const double> coefficients, RowSense row_sense, double value) {
  if (coefficients.size() != num_vars()) throw ShapeMismatch("constraint row length differs from variable count");
  constraints.insert(constraints.end(), coefficients.begin(), coefficients.end());
  senses.push_back(row_sense);
  rhs.push_back(value);
}

void LinearProgram::set_bounds(std::size_t var, double lo, double hi) {
  if (var >= num_vars()) throw ShapeMismatch("bound index out of range");
  if (lower.empty()) lower.assign(num_vars(), 0.0);
  if (upper.empty()) upper.assign(num_vars(), kInfinity);
  lower[var] = lo;
  upper[var] = hi;
}

void LinearProgram::validate() const {
  const std::size_t n = num_vars();
  const std::size_t m = num_rows();
  if (constraints.size() != m * n || senses.size() != m) throw ShapeMismatch("constraint matrix shape is inconsistent");
  if (!lower.empty() && lower.size() != n) throw ShapeMismatch("lower bound vector has wrong length");
  if (!upper.empty() && upper.size() != n) throw ShapeMismatch("upper bound vector has wrong length");
  auto finite_or_throw = [](double v) {
    if (std::isnan(v)) throw ValidationError("NaN in linear program data");
  };
  std::for_each(objective.begin(), objective.end(), finite_or_throw);
  std::for_each(constraints.begin(), constraints.end(), finite_or_throw);
  std::for_each(rhs.begin(), rhs.end(), finite_or_throw);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(lower_bound(j) <= upper_bound(j))) throw ValidationError("variable bounds are crossed");
    if (lower_bound(j) == kInfinity || upper_bound(j) == -kInfinity) throw ValidationError("variable bound is infinite on the wrong side");
  }
}

namespace {

// x = offset + sign * column (Shift/Mirror), or x = pos - neg (Free).
struct VariableMap {
  enum class Kind { Shift, Mirror, Free } kind;
  double offset = 0.0;
  std::size_t column = 0;
  std::size_t negative_column = 0;
};

// Standard form: A x' (sense) b with x' >= 0, b >= 0 after row flips.
struct StandardForm {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<RowSense> senses;
  std::vector<double> flip;  // +1 / -1 per row
  std::vector<double> cost;  // minimization cost per structural column
  double cost_offset = 0.0;
  std::vector<VariableMap> maps;
};

StandardForm to_standard_form(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  const std::size_t m = lp.num_rows();
  const double objective_sign = lp.sense == ObjectiveSense::Maximize ? -1.0 : 1.0;

  StandardForm sf;
  sf.maps.resize(n);
  std::vector<std::size_t> bounded;  // original vars that need an upper-bound row
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = lp.lower_bound(j);
    const double hi = lp.upper_bound(j);
    VariableMap& map = sf.maps[j];
    if (std::isfinite(lo)) {
      map.kind = VariableMap::Kind::Shift;
      map.offset = lo;
      map.column = sf.cols++;
      if (std::isfinite(hi)) bounded.push_back(j);
    } else if (std::isfinite(hi)) {
      map.kind = VariableMap::Kind::Mirror;
      map.offset = hi;
      map.column = sf.cols++;
    } else {
      map.kind = VariableMap::Kind::Free;
      map.column = sf.cols++;
      map.negative_column = sf.cols++;
    }
  }

  sf.rows = m + bounded.size();
  sf.a.assign(sf.rows * sf.cols, 0.0);
  sf.b.assign(sf.rows, 0.0);
  sf.senses.resize(sf.rows);
  sf.flip.assign(sf.rows, 1.0);
  sf.cost.assign(sf.cols, 0.0);

  for (std::size_t j = 0; j < n; ++j) {
    const VariableMap& map = sf.maps[j];
    const double c = objective_sign * lp.objective[j];
    switch (map.kind) {
      case VariableMap::Kind::Shift:
        sf.cost[map.column] = c;
        sf.cost_offset += c * map.offset;
        break;
      case VariableMap::Kind::Mirror:
        sf.cost[map.column] = -c;
        sf.cost_offset += c * map.offset;
        break;
      case VariableMap::Kind::Free:
        sf.cost[map.column] = c;
        sf.cost[map.negative_column] = -c;
        break;
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    double shifted_rhs = lp.rhs[i];
    double* row = sf.a.data() + i * sf.cols;
    for (std::size_t j = 0; j < n; ++j) {
      const double coeff = lp.constraints[i * n + j];
      if (coeff == 0.0) continue;
      const VariableMap& map = sf.maps[j];
      switch (map.kind) {
        case VariableMap::Kind::Shift:
          row[map.column] = coeff;
          shifted_rhs -= coeff * map.offset;
          break;
        case VariableMap::Kind::Mirror:
          row[map.column] = -coeff;
          shifted_rhs -= coeff * map.offset;
          break;
        case VariableMap::Kind::Free:
          row[map.column] = coeff;
          row[map.negative_column] = -coeff;
          break;
      }
    }
    sf.b[i] = shifted_rhs;
    sf.senses[i] = lp.senses[i];
  }
  for (std::size_t k = 0; k < bounded.size(); ++k) {
    const std::size_t i = m + k;
    const std::size_t j = bounded[k];
    sf.a[i * sf.cols + sf.maps[j].column] = 1.0;
    sf.b[i] = lp.upper_bound(j) - lp.lower_bound(j);
    sf.senses[i] = RowSense::LessEqual;
  }

  for (std::size_t i = 0; i < sf.rows; ++i) {
    if (sf.b[i] >= 0.0) continue;
    sf.flip[i] = -1.0;
    sf.b[i] = -sf.b[i];
    for (std::size_t c = 0; c < sf.cols; ++c) sf.a[i * sf.cols + c] = -sf.a[i * sf.cols + c];
    if (sf.senses[i] == RowSense::LessEqual) {
      sf.senses[i] = RowSense::GreaterEqual;
    } else if (sf.senses[i] == RowSense::GreaterEqual) {
      sf.senses[i] = RowSense::LessEqual;
    }
  }
  return sf;
}

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), stride_(cols + 1), data_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t r, std::size_t c) { return data_[r * stride_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * stride_ + c]; }
  double& rhs(std::size_t r) { return data_[r * stride_ + cols_]; }
  double rhs(std::size_t r) const { return data_[r * stride_ + cols_]; }
  // Objective row holds reduced costs; its rhs holds -z.
  double& cost(std::size_t c) { return data_[rows_ * stride_ + c]; }
  double cost(std::size_t c) const { return data_[rows_ * stride_ + c]; }
  double& cost_rhs() { return data_[rows_ * stride_ + cols_]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * stride_, stride_}; }

  std::size_t& basis(std::size_t r) { return basis_[r]; }
  std::size_t basis(std::size_t r) const { return basis_[r]; }

  void pivot(std::size_t pr, std::size_t pc) {
    std::span<double> pivot_row = row(pr);
    kernels::scale(1.0 / pivot_row[pc], pivot_row);
    pivot_row[pc] = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      std::span<double> target = row(r);
      const double factor = target[pc];
      if (factor == 0.0) continue;
      kernels::axpy(-factor, pivot_row, target);
      target[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  // Recomputes the objective row for the given column costs.
  void load_costs(std::span<const double> costs) {
    std::span<double> objective = row(rows_);
    std::fill(objective.begin(), objective.end(), 0.0);
    std::copy(costs.begin(), costs.end(), objective.begin());
    for (std::size_t r = 0; r < rows_; ++r) {
      const double cb = costs[basis_[r]];
      if (cb != 0.0) kernels::axpy(-cb, row(r), objective);
    }
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t stride_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
};

enum class PhaseOutcome { Optimal, Unbounded };

PhaseOutcome run_simplex(Tableau& t, std::size_t enterable_cols, const LpOptions& options, std::size_t& iterations) {
  for (;;) {
    std::size_t entering = enterable_cols;
    for (std::size_t c = 0; c < enterable_cols; ++c) {
      if (t.cost(c) < -options.optimality_tolerance) {
        entering = c;
        break;
      }
    }
    if (entering == enterable_cols) return PhaseOutcome::Optimal;

    std::size_t leaving = t.rows();
    double best_ratio = kInfinity;
    for (std::size_t r = 0; r < t.rows(); ++r) {
      const double a = t.at(r, entering);
      if (a <= options.pivot_tolerance) continue;
      const double ratio = std::max(t.rhs(r), 0.0) / a;
      const double tie = 1e-12 * std::max(1.0, std::abs(best_ratio == kInfinity ? ratio : best_ratio));
      if (ratio < best_ratio - tie) {
        best_ratio = ratio;
        leaving = r;
      } else if (std::abs(ratio - best_ratio) <= tie && t.basis(r) < t.basis(leaving)) {
        leaving = r;
      }
    }
    if (leaving == t.rows()) return PhaseOutcome::Unbounded;

    t.pivot(leaving, entering);
    if (++iterations > options.max_iterations) throw Error("simplex iteration limit reached");
  }
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const LpOptions& options) {
  lp.validate();
  const StandardForm sf = to_standard_form(lp);
  const std::size_t m = sf.rows;

  // Column layout: structural | slack or surplus per inequality row | artificials.
  std::vector<std::size_t> aux_col(m, 0);
  std::vector<std::size_t> art_col(m, 0);
  std::vector<std::size_t> init_col(m, 0);
  std::size_t next = sf.cols;
  for (std::size_t i = 0; i < m; ++i) {
    if (sf.senses[i] != RowSense::Equal) aux_col[i] = next++;
  }
  const std::size_t art_start = next;
  for (std::size_t i = 0; i < m; ++i) {
    if (sf.senses[i] != RowSense::LessEqual) art_col[i] = next++;
  }
  const std::size_t total_cols = next;

  Tableau t(m, total_cols);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(sf.a.begin() + static_cast<std::ptrdiff_t>(i * sf.cols), sf.cols, t.row(i).begin());
    t.rhs(i) = sf.b[i];
    switch (sf.senses[i]) {
      case RowSense::LessEqual:
        t.at(i, aux_col[i]) = 1.0;
        init_col[i] = aux_col[i];
        break;
      case RowSense::GreaterEqual:
        t.at(i, aux_col[i]) = -1.0;
        t.at(i, art_col[i]) = 1.0;
        init_col[i] = art_col[i];
        break;
      case RowSense::Equal:
        t.at(i, art_col[i]) = 1.0;
        init_col[i] = art_col[i];
        break;
    }
    t.basis(i) = init_col[i];
  }

  LpResult result;
  double b_scale = 1.0;
  for (double v : sf.b) b_scale = std::max(b_scale, std::abs(v));

  // Phase I: minimize the sum of artificials.
  std::vector<double> phase1_costs(total_cols, 0.0);
  for (std::size_t c = art_start; c < total_cols; ++c) phase1_costs[c] = 1.0;
  t.load_costs(phase1_costs);
  run_simplex(t, total_cols, options, result.iterations);

  const double infeasibility = -t.cost_rhs();
  if (infeasibility > options.feasibility_tolerance * b_scale) {
    result.status = LpStatus::Infeasible;
    result.farkas.assign(lp.num_rows(), 0.0);
    for (std::size_t i = 0; i < lp.num_rows(); ++i) {
      const double y = phase1_costs[init_col[i]] - t.cost(init_col[i]);
      result.farkas[i] = sf.flip[i] * y;
    }
    return result;
  }

  // Drive zero-level artificials out of the basis. Rows where no structural
  // or slack entry is usable are redundant and keep their artificial at zero.
  for (std::size_t r = 0; r < m; ++r) {
    if (t.basis(r) < art_start) continue;
    for (std::size_t c = 0; c < art_start; ++c) {
      if (std::abs(t.at(r, c)) > options.pivot_tolerance) {
        t.pivot(r, c);
        break;
      }
    }
  }

  // Phase II.
  std::vector<double> phase2_costs(total_cols, 0.0);
  std::copy(sf.cost.begin(), sf.cost.end(), phase2_costs.begin());
  t.load_costs(phase2_costs);
  if (run_simplex(t, art_start, options, result.iterations) == PhaseOutcome::Unbounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  std::vector<double> std_x(sf.cols, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (t.basis(r) < sf.cols) std_x[t.basis(r)] = std::max(t.rhs(r), 0.0);
  }
  result.status = LpStatus::Optimal;
  result.x.resize(lp.num_vars());
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const VariableMap& map = sf.maps[j];
    switch (map.kind) {
      case VariableMap::Kind::Shift:
        result.x[j] = map.offset + std_x[map.column];
        break;
      case VariableMap::Kind::Mirror:
        result.x[j] = map.offset - std_x[map.column];
        break;
      case VariableMap::Kind::Free:
        result.x[j] = std_x[map.column] - std_x[map.negative_column];
        break;
    }
  }
  result.objective = 0.0;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) result.objective += lp.objective[j] * result.x[j];

  const double sense_sign = lp.sense == ObjectiveSense::Maximize ? -1.0 : 1.0;
  double dual_min = sf.cost_offset;
  result.duals.assign(lp.num_rows(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double y = -t.cost(init_col[i]);
    dual_min += sf.b[i] * y;
    if (i < lp.num_rows()) result.duals[i] = sense_sign * sf.flip[i] * y;
  }
  result.dual_objective = sense_sign * dual_min;
  return result;
}

double farkas_gap(const LinearProgram& lp, std::span<const double> y, double sign_tolerance) {
  lp.validate();
  const std::size_t n = lp.num_vars();
  const std::size_t m = lp.num_rows();
  if (y.size() != m) throw ShapeMismatch("Farkas multiplier count differs from row count");

  double y_dot_b = 0.0;
  std::vector<double> combined(n, 0.0);
  std::vector<double> magnitude(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (lp.senses[i] == RowSense::GreaterEqual && y[i] < -sign_tolerance) return -kInfinity;
    if (lp.senses[i] == RowSense::LessEqual && y[i] > sign_tolerance) return -kInfinity;
    y_dot_b += y[i] * lp.rhs[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double term = y[i] * lp.constraints[i * n + j];
      combined[j] += term;
      magnitude[j] += std::abs(term);
    }
  }

  double box_max = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double g = combined[j];
    const double bound = g > 0.0 ? lp.upper_bound(j) : lp.lower_bound(j);
    if (!std::isfinite(bound)) {
      if (std::abs(g) <= 1e-12 * (1.0 + magnitude[j])) continue;
      return -kInfinity;
    }
    box_max += g * bound;
  }
  return y_dot_b - box_max;
}

}  // namespace bellaudit::numeric
