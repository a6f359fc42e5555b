#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "bellaudit/correlations.hpp"
#include "bellaudit/spacetime.hpp"

namespace bellaudit::lhv {

using correlations::CorrelationTable;
using correlations::TableShape;

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

// A hidden-variable value: each side answers from its own setting only.
struct DeterministicStrategy {
  std::vector<std::size_t> response_a;  // x -> a
  std::vector<std::size_t> response_b;  // y -> b
  bool operator==(const DeterministicStrategy&) const = default;
};

struct LocalComponent {
  double weight;
  DeterministicStrategy strategy;
};

// Mixture of deterministic strategies; weights positive and summing to 1
// within 1e-12.
class LocalModel {
 public:
  explicit LocalModel(std::vector<LocalComponent> components);
  const std::vector<LocalComponent>& components() const { return components_; }

 private:
  std::vector<LocalComponent> components_;
};

enum class Receiver { A, B };

// One-way communication: the receiving side also sees the remote setting.
// The receiver's responses are indexed x * settings_b + y; the sender's by
// its own setting only.
struct CommStrategy {
  Receiver receiver = Receiver::A;
  std::vector<std::size_t> response_a;
  std::vector<std::size_t> response_b;
};

struct CommComponent {
  double weight;
  CommStrategy strategy;
};

class CommModel {
 public:
  explicit CommModel(std::vector<CommComponent> components);
  const std::vector<CommComponent>& components() const { return components_; }

 private:
  std::vector<CommComponent> components_;
};

// Throws ShapeMismatch when a strategy does not fit the shape.
CorrelationTable predict(const LocalModel& model, const TableShape& shape);
CorrelationTable predict(const CommModel& model, const TableShape& shape);

// 0/1 table of a single deterministic strategy.
CorrelationTable strategy_table(const DeterministicStrategy& strategy, const TableShape& shape);

// |A|^|X| * |B|^|Y|, saturating at SIZE_MAX.
std::size_t strategy_count(const TableShape& shape);

// Lexicographic order: response_a[0] is the most significant digit and
// response_b[|Y|-1] the least.
DeterministicStrategy strategy_at(const TableShape& shape, std::size_t index);

// Common-cause model for a table where one side has a single setting. The
// single-setting side's marginal must not depend on the remote setting
// (within `tolerance`); otherwise NotApplicable. Also NotApplicable when
// both sides have several settings.
LocalModel build_single_setting_model(const CorrelationTable& table, double tolerance = 1e-9);

// One-way-communication model via the chain rule P(a,b|x,y) =
// P(b|y) P(a|b,x,y) (receiver A). Throws NotApplicable when the sender's
// marginal depends on the receiver's setting, CapExceeded when the model
// would need more than `max_components` components.
CommModel build_comm_model(const CorrelationTable& table, Receiver receiver = Receiver::A, double tolerance = 1e-9,
                           std::size_t max_components = kDefaultEnumerationCap);

// The side whose last Outcome is latest receives the remote setting.
Receiver default_receiver(const spacetime::ExperimentSchedule& schedule);

// Separating functional over table entries ([x][y][a][b] order), affinely
// normalized so the uniform table scores 0 and the best deterministic
// strategy scores 2 (CHSH scale). When the functional is constant on
// no-signaling tables that normalization is impossible and the raw
// functional is kept (`normalized` false).
struct InfeasibilityCertificate {
  std::vector<double> coefficients;
  double table_value = 0.0;
  double local_max = 0.0;
  bool normalized = false;
  // Largest v with v*table + (1-v)*uniform inside the local polytope.
  double robustness = 0.0;
};

using MembershipResult = std::variant<LocalModel, InfeasibilityCertificate>;

// LP over the weights of every deterministic strategy, maximizing the
// white-noise robustness. A table whose marginals signal by more than 1e-7
// gets a marginal-difference certificate (robustness 0) without the LP.
// Throws CapExceeded above `cap` strategies.
MembershipResult local_polytope_membership(const CorrelationTable& table, std::size_t cap = kDefaultEnumerationCap);

// Value of a functional on every deterministic strategy, lexicographic order.
std::vector<double> evaluate_on_strategies(const TableShape& shape, const std::vector<double>& coefficients,
                                           std::size_t cap = kDefaultEnumerationCap);

}  // namespace bellaudit::lhv
