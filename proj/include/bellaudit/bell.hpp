#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bellaudit/correlations.hpp"
#include "bellaudit/lhv.hpp"

namespace bellaudit::bell {

using correlations::CorrelationTable;

// Full-correlation Bell expression sum_{x,y} c_{xy} E(x, y).
class BellExpression {
 public:
  // coefficients are row-major settings_a x settings_b. Throws
  // ValidationError when every coefficient is zero.
  BellExpression(std::string name, std::size_t settings_a, std::size_t settings_b, std::vector<double> coefficients,
                 double declared_local_bound);

  const std::string& name() const { return name_; }
  std::size_t settings_a() const { return settings_a_; }
  std::size_t settings_b() const { return settings_b_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  double coefficient(std::size_t x, std::size_t y) const { return coefficients_[x * settings_b_ + y]; }
  double declared_local_bound() const { return declared_local_bound_; }

 private:
  std::string name_;
  std::size_t settings_a_;
  std::size_t settings_b_;
  std::vector<double> coefficients_;
  double declared_local_bound_;
};

// S = E(1,1) + E(1,2) + E(2,1) - E(2,2), local bound 2.
BellExpression chsh();

// E(a1,b1) + E(b1,a2) + E(a2,b2) + ... + E(an,bn) - E(bn,a1), local bound 2n-2.
BellExpression chained_expression(std::size_t n);

double evaluate(const BellExpression& expr, const CorrelationTable& table);

struct LocalBound {
  double value;
  lhv::DeterministicStrategy witness;  // first maximizer in lexicographic order
};

// Maximum over all 2^|X| * 2^|Y| deterministic +-1 strategies.
LocalBound local_bound_by_enumeration(const BellExpression& expr, std::size_t cap = lhv::kDefaultEnumerationCap);

// 2n cos(pi / 2n).
double quantum_chained_value(std::size_t n);

// (2n - 2) / (2n cos(pi / 2n)).
double critical_visibility(std::size_t n);

struct PhaseSettings {
  std::vector<double> phases_a;
  std::vector<double> phases_b;
  double value = 0.0;
};

// Franson correlator E = cos(phi_a + phi_b) evaluated on the chained
// expression at the given phases.
double chained_value_at_phases(std::size_t n, std::span<const double> phases_a, std::span<const double> phases_b);

// Phases maximizing the chained expression on the ideal Franson table,
// found by pattern search with `restarts` restarts.
PhaseSettings optimize_chained_phases(std::size_t n, std::size_t restarts = 8, std::uint64_t seed = 0);

}  // namespace bellaudit::bell
