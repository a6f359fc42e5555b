#include "bellaudit/lhv.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "bellaudit/errors.hpp"
#include "bellaudit/kernels.hpp"
#include "bellaudit/lp.hpp"

namespace bellaudit::lhv {

using correlations::MarginalSide;

namespace {

constexpr double kWeightSumTolerance = 1e-12;
// Components lighter than this are dropped from constructed models.
constexpr double kNegligibleWeight = 1e-15;

template <typename Component>
void check_weights(const std::vector<Component>& components) {
  if (components.empty()) throw ValidationError("a model needs at least one component");
  double sum = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) throw ValidationError("model weights must be positive");
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) throw ValidationError("model weights sum to " + std::to_string(sum));
}

template <typename Component>
std::vector<Component> normalized(std::vector<Component> components) {
  double sum = 0.0;
  for (const auto& c : components) sum += c.weight;
  for (auto& c : components) c.weight /= sum;
  return components;
}

std::size_t checked_product(std::size_t acc, std::size_t factor, std::size_t times) {
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < times; ++i) {
    if (factor != 0 && acc > kMax / factor) return kMax;
    acc *= factor;
  }
  return acc;
}

void check_range(const std::vector<std::size_t>& responses, std::size_t expected_len, std::size_t outcomes) {
  if (responses.size() != expected_len) throw ShapeMismatch("strategy response length does not match table shape");
  for (std::size_t r : responses) {
    if (r >= outcomes) throw ShapeMismatch("strategy response outside the outcome alphabet");
  }
}

}  // namespace

LocalModel::LocalModel(std::vector<LocalComponent> components) : components_(std::move(components)) {
  check_weights(components_);
}

CommModel::CommModel(std::vector<CommComponent> components) : components_(std::move(components)) {
  check_weights(components_);
}

CorrelationTable predict(const LocalModel& model, const TableShape& shape) {
  std::vector<double> probs(shape.size(), 0.0);
  for (const LocalComponent& c : model.components()) {
    check_range(c.strategy.response_a, shape.settings_a, shape.outcomes_a);
    check_range(c.strategy.response_b, shape.settings_b, shape.outcomes_b);
    for (std::size_t x = 0; x < shape.settings_a; ++x) {
      for (std::size_t y = 0; y < shape.settings_b; ++y) {
        probs[shape.index(x, y, c.strategy.response_a[x], c.strategy.response_b[y])] += c.weight;
      }
    }
  }
  return {shape, std::move(probs)};
}

CorrelationTable predict(const CommModel& model, const TableShape& shape) {
  const std::size_t pairs = shape.settings_a * shape.settings_b;
  std::vector<double> probs(shape.size(), 0.0);
  for (const CommComponent& c : model.components()) {
    const CommStrategy& s = c.strategy;
    const bool a_receives = s.receiver == Receiver::A;
    check_range(s.response_a, a_receives ? pairs : shape.settings_a, shape.outcomes_a);
    check_range(s.response_b, a_receives ? shape.settings_b : pairs, shape.outcomes_b);
    for (std::size_t x = 0; x < shape.settings_a; ++x) {
      for (std::size_t y = 0; y < shape.settings_b; ++y) {
        const std::size_t xy = x * shape.settings_b + y;
        const std::size_t a = a_receives ? s.response_a[xy] : s.response_a[x];
        const std::size_t b = a_receives ? s.response_b[y] : s.response_b[xy];
        probs[shape.index(x, y, a, b)] += c.weight;
      }
    }
  }
  return {shape, std::move(probs)};
}

CorrelationTable strategy_table(const DeterministicStrategy& strategy, const TableShape& shape) {
  return predict(LocalModel({{1.0, strategy}}), shape);
}

std::size_t strategy_count(const TableShape& shape) {
  return checked_product(checked_product(1, shape.outcomes_a, shape.settings_a), shape.outcomes_b, shape.settings_b);
}

DeterministicStrategy strategy_at(const TableShape& shape, std::size_t index) {
  if (index >= strategy_count(shape)) throw ShapeMismatch("strategy index out of range");
  DeterministicStrategy s;
  s.response_a.resize(shape.settings_a);
  s.response_b.resize(shape.settings_b);
  for (std::size_t y = shape.settings_b; y-- > 0;) {
    s.response_b[y] = index % shape.outcomes_b;
    index /= shape.outcomes_b;
  }
  for (std::size_t x = shape.settings_a; x-- > 0;) {
    s.response_a[x] = index % shape.outcomes_a;
    index /= shape.outcomes_a;
  }
  return s;
}

namespace {

// Single-setting construction with B as the side that never changes.
LocalModel single_setting_b(const CorrelationTable& table, double tolerance) {
  const TableShape& s = table.shape();
  const auto report = correlations::no_signaling_check(table, tolerance);
  for (const auto& v : report.violations) {
    if (v.side == MarginalSide::B) {
      throw NotApplicable("the fixed side's marginal depends on the remote setting (deviation " +
                          std::to_string(v.deviation) + "); no common-cause model reproduces signaling data");
    }
  }

  // q(b): fixed-side marginal, averaged over the remote setting.
  std::vector<double> q(s.outcomes_b, 0.0);
  for (std::size_t x = 0; x < s.settings_a; ++x) {
    const auto m = table.marginal_b(x, 0);
    for (std::size_t b = 0; b < s.outcomes_b; ++b) q[b] += m[b] / static_cast<double>(s.settings_a);
  }

  std::vector<LocalComponent> components;
  DeterministicStrategy current;
  current.response_a.assign(s.settings_a, 0);
  current.response_b.assign(1, 0);
  for (std::size_t b = 0; b < s.outcomes_b; ++b) {
    if (q[b] <= 0.0) continue;
    current.response_b[0] = b;
    // conditional[x][a] = P(a | x, b)
    std::vector<std::vector<double>> conditional(s.settings_a, std::vector<double>(s.outcomes_a, 0.0));
    bool usable = true;
    for (std::size_t x = 0; x < s.settings_a && usable; ++x) {
      const double pb = table.marginal_b(x, 0)[b];
      if (pb <= 0.0) {
        usable = false;
        break;
      }
      for (std::size_t a = 0; a < s.outcomes_a; ++a) conditional[x][a] = table(x, 0, a, b) / pb;
    }
    if (!usable) continue;
    // One shared uniform u drives every x through its conditional quantile,
    // so each cell between consecutive CDF breakpoints is one strategy.
    std::vector<std::vector<double>> cdf(s.settings_a, std::vector<double>(s.outcomes_a, 0.0));
    std::vector<double> cuts{0.0, 1.0};
    for (std::size_t x = 0; x < s.settings_a; ++x) {
      double acc = 0.0;
      for (std::size_t a = 0; a < s.outcomes_a; ++a) {
        acc += conditional[x][a];
        cdf[x][a] = std::min(acc, 1.0);
        if (a + 1 < s.outcomes_a) cuts.push_back(cdf[x][a]);
      }
      cdf[x][s.outcomes_a - 1] = 1.0;
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double width = cuts[k + 1] - cuts[k];
      const double weight = q[b] * width;
      if (width <= 0.0 || weight <= kNegligibleWeight) continue;
      const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
      for (std::size_t x = 0; x < s.settings_a; ++x) {
        std::size_t a = 0;
        while (a + 1 < s.outcomes_a && cdf[x][a] <= mid) ++a;
        current.response_a[x] = a;
      }
      components.push_back({weight, current});
    }
  }
  return LocalModel(normalized(std::move(components)));
}

LocalModel swap_model(const LocalModel& model) {
  std::vector<LocalComponent> out;
  out.reserve(model.components().size());
  for (const LocalComponent& c : model.components()) {
    out.push_back({c.weight, {c.strategy.response_b, c.strategy.response_a}});
  }
  return LocalModel(std::move(out));
}

}  // namespace

LocalModel build_single_setting_model(const CorrelationTable& table, double tolerance) {
  const TableShape& s = table.shape();
  if (s.settings_b == 1) return single_setting_b(table, tolerance);
  if (s.settings_a == 1) return swap_model(single_setting_b(correlations::swap_sides(table), tolerance));
  throw NotApplicable("single-setting construction needs one side with exactly one setting");
}

namespace {

CommModel comm_model_a_receives(const CorrelationTable& table, double tolerance, std::size_t max_components) {
  const TableShape& s = table.shape();
  const auto report = correlations::no_signaling_check(table, tolerance);
  for (const auto& v : report.violations) {
    if (v.side == MarginalSide::B) {
      throw NotApplicable("sender marginal depends on the receiver's setting (deviation " + std::to_string(v.deviation) +
                          "); even one-way communication cannot explain this table");
    }
  }

  // q[y][b] = P(b | y), averaged over x.
  std::vector<std::vector<double>> q(s.settings_b, std::vector<double>(s.outcomes_b, 0.0));
  for (std::size_t y = 0; y < s.settings_b; ++y) {
    for (std::size_t x = 0; x < s.settings_a; ++x) {
      const auto m = table.marginal_b(x, y);
      for (std::size_t b = 0; b < s.outcomes_b; ++b) q[y][b] += m[b] / static_cast<double>(s.settings_a);
    }
  }

  const std::size_t pairs = s.settings_a * s.settings_b;
  std::vector<CommComponent> components;
  CommStrategy current{Receiver::A, std::vector<std::size_t>(pairs, 0), std::vector<std::size_t>(s.settings_b, 0)};

  auto conditional_a = [&](std::size_t x, std::size_t y, std::size_t a, std::size_t b) {
    const double pb = table.marginal_b(x, y)[b];
    return pb > 0.0 ? table(x, y, a, b) / pb : 0.0;
  };

  // Digits: b_y for every y, then a_{x,y} for every (x, y) given b_y.
  std::function<void(std::size_t, double)> expand_a = [&](std::size_t xy, double weight) {
    if (xy == pairs) {
      if (weight > kNegligibleWeight) {
        if (components.size() >= max_components) throw CapExceeded("one-way-communication model exceeds the component cap");
        components.push_back({weight, current});
      }
      return;
    }
    const std::size_t x = xy / s.settings_b;
    const std::size_t y = xy % s.settings_b;
    for (std::size_t a = 0; a < s.outcomes_a; ++a) {
      const double w = weight * conditional_a(x, y, a, current.response_b[y]);
      if (w <= 0.0) continue;
      current.response_a[xy] = a;
      expand_a(xy + 1, w);
    }
  };
  std::function<void(std::size_t, double)> expand_b = [&](std::size_t y, double weight) {
    if (y == s.settings_b) {
      expand_a(0, weight);
      return;
    }
    for (std::size_t b = 0; b < s.outcomes_b; ++b) {
      const double w = weight * q[y][b];
      if (w <= 0.0) continue;
      current.response_b[y] = b;
      expand_b(y + 1, w);
    }
  };
  expand_b(0, 1.0);
  return CommModel(normalized(std::move(components)));
}

}  // namespace

CommModel build_comm_model(const CorrelationTable& table, Receiver receiver, double tolerance,
                           std::size_t max_components) {
  if (receiver == Receiver::A) return comm_model_a_receives(table, tolerance, max_components);

  const TableShape& s = table.shape();
  const CommModel swapped = comm_model_a_receives(correlations::swap_sides(table), tolerance, max_components);
  std::vector<CommComponent> out;
  out.reserve(swapped.components().size());
  for (const CommComponent& c : swapped.components()) {
    // In the swapped table the receiver index is y * settings_a + x.
    CommStrategy st{Receiver::B, c.strategy.response_b, std::vector<std::size_t>(s.settings_a * s.settings_b, 0)};
    for (std::size_t x = 0; x < s.settings_a; ++x) {
      for (std::size_t y = 0; y < s.settings_b; ++y) {
        st.response_b[x * s.settings_b + y] = c.strategy.response_a[y * s.settings_a + x];
      }
    }
    out.push_back({c.weight, std::move(st)});
  }
  return CommModel(std::move(out));
}

Receiver default_receiver(const spacetime::ExperimentSchedule& schedule) {
  double latest_a = -std::numeric_limits<double>::infinity();
  double latest_b = latest_a;
  for (const auto& e : schedule.events) {
    if (e.kind != spacetime::EventKind::Outcome) continue;
    if (e.side == spacetime::Side::A) latest_a = std::max(latest_a, e.time);
    if (e.side == spacetime::Side::B) latest_b = std::max(latest_b, e.time);
  }
  return latest_b > latest_a ? Receiver::B : Receiver::A;
}

std::vector<double> evaluate_on_strategies(const TableShape& shape, const std::vector<double>& coefficients,
                                           std::size_t cap) {
  if (coefficients.size() != shape.size()) throw ShapeMismatch("functional length does not match table shape");
  const std::size_t count = strategy_count(shape);
  if (count > cap) throw CapExceeded("instance too large: " + std::to_string(count) + " deterministic strategies");

  const std::size_t count_b = checked_product(1, shape.outcomes_b, shape.settings_b);
  const std::size_t count_a = count / count_b;
  // Indicator matrix of B strategies over (y, b) slots, so that each A
  // strategy reduces to a matrix-vector product.
  const std::size_t slots = shape.settings_b * shape.outcomes_b;
  std::vector<double> b_indicator(count_b * slots, 0.0);
  for (std::size_t ib = 0; ib < count_b; ++ib) {
    std::size_t rest = ib;
    for (std::size_t y = shape.settings_b; y-- > 0;) {
      b_indicator[ib * slots + y * shape.outcomes_b + rest % shape.outcomes_b] = 1.0;
      rest /= shape.outcomes_b;
    }
  }

  std::vector<double> values(count);
  std::vector<double> slot_weights(slots);
  std::vector<std::size_t> a_digits(shape.settings_a, 0);
  for (std::size_t ia = 0; ia < count_a; ++ia) {
    std::size_t rest = ia;
    for (std::size_t x = shape.settings_a; x-- > 0;) {
      a_digits[x] = rest % shape.outcomes_a;
      rest /= shape.outcomes_a;
    }
    std::fill(slot_weights.begin(), slot_weights.end(), 0.0);
    for (std::size_t x = 0; x < shape.settings_a; ++x) {
      for (std::size_t y = 0; y < shape.settings_b; ++y) {
        for (std::size_t b = 0; b < shape.outcomes_b; ++b) {
          slot_weights[y * shape.outcomes_b + b] += coefficients[shape.index(x, y, a_digits[x], b)];
        }
      }
    }
    kernels::gemv(b_indicator, count_b, slots, slot_weights,
                  std::span<double>(values.data() + ia * count_b, count_b));
  }
  return values;
}

namespace {

constexpr double kRobustnessSlack = 5e-8;
constexpr double kSignalingCertificateGap = 1e-7;

// A marginal difference vanishes on every no-signaling table, so it separates
// a signaling table without solving the LP. Any noise mixture still signals,
// hence robustness 0.
std::optional<InfeasibilityCertificate> signaling_certificate(const CorrelationTable& table) {
  const TableShape& s = table.shape();
  double best = kSignalingCertificateGap;
  std::optional<InfeasibilityCertificate> cert;
  const auto consider = [&](bool side_a, std::size_t own, std::size_t r1, std::size_t r2, std::size_t outcome) {
    const auto cell = [&](std::size_t remote, std::size_t other) {
      return side_a ? s.index(own, remote, outcome, other) : s.index(remote, own, other, outcome);
    };
    const std::size_t others = side_a ? s.outcomes_b : s.outcomes_a;
    double diff = 0.0;
    for (std::size_t o = 0; o < others; ++o) diff += table.probs()[cell(r1, o)] - table.probs()[cell(r2, o)];
    if (std::abs(diff) <= best) return;
    best = std::abs(diff);
    const double sign = diff > 0.0 ? 1.0 : -1.0;
    InfeasibilityCertificate c;
    c.coefficients.assign(s.size(), 0.0);
    for (std::size_t o = 0; o < others; ++o) {
      c.coefficients[cell(r1, o)] = sign;
      c.coefficients[cell(r2, o)] = -sign;
    }
    cert = std::move(c);
  };
  for (std::size_t x = 0; x < s.settings_a; ++x)
    for (std::size_t y1 = 0; y1 < s.settings_b; ++y1)
      for (std::size_t y2 = y1 + 1; y2 < s.settings_b; ++y2)
        for (std::size_t a = 0; a < s.outcomes_a; ++a) consider(true, x, y1, y2, a);
  for (std::size_t y = 0; y < s.settings_b; ++y)
    for (std::size_t x1 = 0; x1 < s.settings_a; ++x1)
      for (std::size_t x2 = x1 + 1; x2 < s.settings_a; ++x2)
        for (std::size_t b = 0; b < s.outcomes_b; ++b) consider(false, y, x1, x2, b);
  if (cert) {
    cert->table_value = kernels::dot(cert->coefficients, table.probs());
    cert->local_max = 0.0;
    cert->normalized = false;
    cert->robustness = 0.0;
  }
  return cert;
}

}  // namespace

MembershipResult local_polytope_membership(const CorrelationTable& table, std::size_t cap) {
  const TableShape& shape = table.shape();
  const std::size_t count = strategy_count(shape);
  if (count > cap) throw CapExceeded("instance too large: " + std::to_string(count) + " deterministic strategies");
  if (auto cert = signaling_certificate(table)) return *std::move(cert);

  const std::size_t rows = shape.size();
  const std::size_t v_index = count;
  const CorrelationTable uniform = CorrelationTable::uniform(shape);

  // maximize v  s.t.  sum_s w_s D_s + v (U - P) = U,  w >= 0,  0 <= v <= 1
  numeric::LinearProgram lp(count + 1, numeric::ObjectiveSense::Maximize);
  lp.objective[v_index] = 1.0;
  lp.constraints.assign(rows * (count + 1), 0.0);
  lp.rhs.assign(uniform.probs().begin(), uniform.probs().end());
  lp.senses.assign(rows, numeric::RowSense::Equal);
  for (std::size_t s = 0; s < count; ++s) {
    const DeterministicStrategy st = strategy_at(shape, s);
    for (std::size_t x = 0; x < shape.settings_a; ++x) {
      for (std::size_t y = 0; y < shape.settings_b; ++y) {
        lp.constraints[shape.index(x, y, st.response_a[x], st.response_b[y]) * (count + 1) + s] = 1.0;
      }
    }
  }
  for (std::size_t k = 0; k < rows; ++k) {
    lp.constraints[k * (count + 1) + v_index] = uniform.probs()[k] - table.probs()[k];
  }
  lp.set_bounds(v_index, 0.0, 1.0);

  const numeric::LpResult result = numeric::solve_lp(lp);
  if (result.status != numeric::LpStatus::Optimal) throw Error("local polytope LP did not reach an optimum");
  const double robustness = result.x[v_index];

  if (robustness >= 1.0 - kRobustnessSlack) {
    std::vector<LocalComponent> components;
    for (std::size_t s = 0; s < count; ++s) {
      if (result.x[s] > kNegligibleWeight) components.push_back({result.x[s], strategy_at(shape, s)});
    }
    return LocalModel(normalized(std::move(components)));
  }

  InfeasibilityCertificate cert;
  cert.robustness = robustness;
  cert.coefficients.resize(rows);
  for (std::size_t k = 0; k < rows; ++k) cert.coefficients[k] = -result.duals[k];

  auto value_on = [&](const CorrelationTable& t) {
    return kernels::dot(cert.coefficients, t.probs());
  };
  std::vector<double> on_strategies = evaluate_on_strategies(shape, cert.coefficients, cap);
  double local_max = on_strategies[kernels::argmax(on_strategies)];
  const double on_uniform = value_on(uniform);
  const double spread = local_max - on_uniform;
  if (spread > 1e-12) {
    const double shift = on_uniform / static_cast<double>(shape.settings_a * shape.settings_b);
    for (double& c : cert.coefficients) c = 2.0 * (c - shift) / spread;
    cert.normalized = true;
    on_strategies = evaluate_on_strategies(shape, cert.coefficients, cap);
    local_max = on_strategies[kernels::argmax(on_strategies)];
  }
  cert.local_max = local_max;
  cert.table_value = value_on(table);
  if (!(cert.table_value > cert.local_max + 1e-7)) {
    throw Error("local polytope certificate failed its self-check");
  }
  return cert;
}

}  // namespace bellaudit::lhv
