#include <algorithm>
#include <cmath>
#include <map>

#include "bellaudit/errors.hpp"
#include "bellaudit/franson.hpp"
#include "bellaudit/optimize.hpp"

namespace bellaudit::franson {

void PathStrategy::validate() const {
  if (outcome_a.size() != path_a.size() || outcome_b.size() != path_b.size()) {
    throw ShapeMismatch("path strategy needs one outcome and one path per setting");
  }
  if (outcome_a.empty() || outcome_b.empty()) throw ValidationError("path strategy has no settings");
  const auto pm1 = [](int v) { return v == 1 || v == -1; };
  if (!std::all_of(outcome_a.begin(), outcome_a.end(), pm1) || !std::all_of(outcome_b.begin(), outcome_b.end(), pm1)) {
    throw ValidationError("path strategy outcomes must be +1 or -1");
  }
  if (strategy_class == StrategyClass::FixedPath) {
    const auto constant = [](const std::vector<PathChoice>& p) {
      return std::all_of(p.begin(), p.end(), [&](PathChoice c) { return c == p.front(); });
    };
    if (!constant(path_a) || !constant(path_b)) throw ValidationError("fixed-path strategy changes path with the setting");
  }
}

double postselected_value(std::span<const WeightedPathStrategy> mixture, const bell::BellExpression& expr) {
  const std::size_t nx = expr.settings_a();
  const std::size_t ny = expr.settings_b();
  if (mixture.empty()) throw ValidationError("empty mixture");
  double total = 0.0;
  for (const WeightedPathStrategy& m : mixture) {
    m.strategy.validate();
    if (m.strategy.outcome_a.size() != nx || m.strategy.outcome_b.size() != ny) {
      throw ShapeMismatch("strategy settings do not match the expression");
    }
    if (!(m.weight >= 0.0) || !std::isfinite(m.weight)) throw ValidationError("mixture weights must be non-negative");
    total += m.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("mixture weights must sum to 1");

  double value = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      double num = 0.0;
      double den = 0.0;
      for (const WeightedPathStrategy& m : mixture) {
        if (!m.strategy.kept(x, y)) continue;
        num += m.weight * m.strategy.outcome_a[x] * m.strategy.outcome_b[y];
        den += m.weight;
      }
      if (den <= 0.0) {
        throw EmptyCell("setting pair (" + std::to_string(x) + ", " + std::to_string(y) + ") keeps no weight");
      }
      value += expr.coefficient(x, y) * (num / den);
    }
  }
  return value;
}

namespace {

// Per-cell kept flag K and kept product N = a b K, row-major over (x, y).
struct Signature {
  std::vector<std::int8_t> kept;
  std::vector<std::int8_t> product;
  auto operator<=>(const Signature&) const = default;
};

std::size_t raw_strategy_count(std::size_t nx, std::size_t ny, StrategyClass cls) {
  const std::size_t bits = cls == StrategyClass::SettingDependentPath ? 2 * (nx + ny) : nx + ny + 2;
  if (bits >= 63) return SIZE_MAX;
  return std::size_t{1} << bits;
}

// Bits, most significant first: outcomes A, paths A, outcomes B, paths B.
// Digit 0 is +1 / Short. FixedPath strategies use one path bit per side.
PathStrategy decode(std::size_t index, std::size_t nx, std::size_t ny, StrategyClass cls) {
  const std::size_t pa_bits = cls == StrategyClass::SettingDependentPath ? nx : 1;
  const std::size_t pb_bits = cls == StrategyClass::SettingDependentPath ? ny : 1;
  std::size_t shift = nx + pa_bits + ny + pb_bits;
  const auto next = [&]() {
    --shift;
    return (index >> shift) & 1U;
  };
  PathStrategy s;
  s.strategy_class = cls;
  s.outcome_a.resize(nx);
  s.outcome_b.resize(ny);
  for (int& o : s.outcome_a) o = next() ? -1 : 1;
  std::vector<PathChoice> pa(pa_bits);
  for (PathChoice& p : pa) p = next() ? PathChoice::Long : PathChoice::Short;
  for (int& o : s.outcome_b) o = next() ? -1 : 1;
  std::vector<PathChoice> pb(pb_bits);
  for (PathChoice& p : pb) p = next() ? PathChoice::Long : PathChoice::Short;
  s.path_a = pa_bits == nx ? pa : std::vector<PathChoice>(nx, pa.front());
  s.path_b = pb_bits == ny ? pb : std::vector<PathChoice>(ny, pb.front());
  return s;
}

Signature signature_of(const PathStrategy& s) {
  const std::size_t nx = s.outcome_a.size();
  const std::size_t ny = s.outcome_b.size();
  Signature sig{std::vector<std::int8_t>(nx * ny), std::vector<std::int8_t>(nx * ny)};
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      const bool k = s.kept(x, y);
      sig.kept[x * ny + y] = k ? 1 : 0;
      sig.product[x * ny + y] = static_cast<std::int8_t>(k ? s.outcome_a[x] * s.outcome_b[y] : 0);
    }
  }
  return sig;
}

struct Candidate {
  double value;
  std::size_t first;
  std::size_t second;  // == first for a single strategy
  double weight;       // weight of `first`
};

// Value of a weighted set of signatures; NaN when some cell is empty.
double signature_value(const std::vector<Signature>& sigs, std::span<const std::size_t> members,
                       std::span<const double> weights, const std::vector<double>& coeffs) {
  double value = 0.0;
  for (std::size_t cell = 0; cell < coeffs.size(); ++cell) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t m = 0; m < members.size(); ++m) {
      const Signature& s = sigs[members[m]];
      num += weights[m] * s.product[cell];
      den += weights[m] * s.kept[cell];
    }
    if (den <= 0.0) return NAN;
    value += coeffs[cell] * (num / den);
  }
  return value;
}

std::vector<double> softmax(std::span<const double> z) {
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> w(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += (w[i] = std::exp(z[i] - top));
  for (double& wi : w) wi /= sum;
  return w;
}

}  // namespace

PostselectedBound search_postselected_bound(const bell::BellExpression& expr, StrategyClass strategy_class,
                                            std::size_t budget, const PostselectedSearchOptions& options) {
  const std::size_t nx = expr.settings_a();
  const std::size_t ny = expr.settings_b();
  const std::size_t raw = raw_strategy_count(nx, ny, strategy_class);
  if (raw > options.max_strategies) {
    throw CapExceeded("postselected search needs " + (raw == SIZE_MAX ? std::string("too many") : std::to_string(raw)) +
                      " strategies, cap is " + std::to_string(options.max_strategies));
  }
  if (options.weight_grid < 2) throw DomainError("weight grid needs at least two steps");

  // Distinct signatures in enumeration order; never-kept strategies cannot
  // contribute to any cell and are dropped.
  std::vector<Signature> sigs;
  std::vector<PathStrategy> reps;
  std::map<Signature, std::size_t> seen;
  for (std::size_t i = 0; i < raw; ++i) {
    PathStrategy s = decode(i, nx, ny, strategy_class);
    Signature sig = signature_of(s);
    if (std::none_of(sig.kept.begin(), sig.kept.end(), [](std::int8_t k) { return k != 0; })) continue;
    if (seen.emplace(sig, sigs.size()).second) {
      sigs.push_back(std::move(sig));
      reps.push_back(std::move(s));
    }
  }

  const std::vector<double>& coeffs = expr.coefficients();
  const std::size_t cells = coeffs.size();
  const double grid = static_cast<double>(options.weight_grid);
  const std::size_t keep = std::max<std::size_t>(4 * options.refine_strategies, 1);
  std::vector<Candidate> top;  // best first; ties keep enumeration order
  const auto offer = [&](const Candidate& c) {
    if (top.size() == keep && !(c.value > top.back().value)) return;
    auto at = std::upper_bound(top.begin(), top.end(), c.value,
                               [](double v, const Candidate& e) { return v > e.value; });
    top.insert(at, c);
    if (top.size() > keep) top.pop_back();
  };

  for (std::size_t i = 0; i < sigs.size(); ++i) {
    const Signature& si = sigs[i];
    if (std::all_of(si.kept.begin(), si.kept.end(), [](std::int8_t k) { return k != 0; })) {
      double v = 0.0;
      for (std::size_t cell = 0; cell < cells; ++cell) v += coeffs[cell] * si.product[cell];
      offer({v, i, i, 1.0});
    }
    for (std::size_t j = i + 1; j < sigs.size(); ++j) {
      const Signature& sj = sigs[j];
      // For interior weights each cell is N_i, N_j or w N_i + (1 - w) N_j,
      // so the value is affine in w.
      double base = 0.0;
      double slope = 0.0;
      bool covered = true;
      for (std::size_t cell = 0; cell < cells; ++cell) {
        const bool ki = si.kept[cell] != 0;
        const bool kj = sj.kept[cell] != 0;
        if (ki && kj) {
          base += coeffs[cell] * sj.product[cell];
          slope += coeffs[cell] * (si.product[cell] - sj.product[cell]);
        } else if (ki) {
          base += coeffs[cell] * si.product[cell];
        } else if (kj) {
          base += coeffs[cell] * sj.product[cell];
        } else {
          covered = false;
          break;
        }
      }
      if (!covered) continue;
      // Walk the grid outward from 1/2, keeping strict improvements only;
      // for an affine function that settles on the middle or an end point.
      std::size_t best_step = options.weight_grid / 2;
      double best = base + slope * (static_cast<double>(best_step) / grid);
      for (const std::size_t step : {std::size_t{1}, options.weight_grid - 1}) {
        const double v = base + slope * (static_cast<double>(step) / grid);
        if (v > best) {
          best = v;
          best_step = step;
        }
      }
      offer({best, i, j, static_cast<double>(best_step) / grid});
    }
  }
  if (top.empty()) throw EmptyCell("no mixture of at most two strategies keeps every setting pair");

  PostselectedBound out;
  out.distinct_strategies = sigs.size();
  out.grid_value = top.front().value;
  const Candidate& lead = top.front();
  if (lead.first == lead.second) {
    out.witness.push_back({1.0, reps[lead.first]});
  } else {
    out.witness.push_back({lead.weight, reps[lead.first]});
    out.witness.push_back({1.0 - lead.weight, reps[lead.second]});
  }

  if (budget > 0 && options.refine_strategies >= 2) {
    std::vector<std::size_t> members;
    for (const Candidate& c : top) {
      for (const std::size_t id : {c.first, c.second}) {
        if (members.size() < options.refine_strategies && std::find(members.begin(), members.end(), id) == members.end()) {
          members.push_back(id);
        }
      }
    }
    if (members.size() >= 2) {
      numeric::PatternSearchOptions po;
      po.start.assign(members.size(), po.lower);
      po.start[0] = 0.0;
      if (lead.first != lead.second) po.start[1] = std::log(lead.weight / (1.0 - lead.weight));
      const auto objective = [&](std::span<const double> z) {
        const std::vector<double> w = softmax(z);
        const double v = signature_value(sigs, members, w, coeffs);
        return std::isnan(v) ? INFINITY : -v;
      };
      const numeric::MinimizeResult r = numeric::minimize_free(objective, members.size(), budget, options.seed, po);
      if (std::isfinite(r.value) && -r.value > out.grid_value + 1e-12) {
        const std::vector<double> w = softmax(r.point);
        out.witness.clear();
        for (std::size_t m = 0; m < members.size(); ++m) out.witness.push_back({w[m], reps[members[m]]});
      }
    }
  }
  out.value = postselected_value(out.witness, expr);
  return out;
}

}  // namespace bellaudit::franson
