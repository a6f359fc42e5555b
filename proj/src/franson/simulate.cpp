#include <algorithm>
#include <cmath>
#include <thread>

#include "bellaudit/errors.hpp"
#include "bellaudit/franson.hpp"
#include "bellaudit/rng.hpp"

namespace bellaudit::franson {

using correlations::MarginalSide;

std::uint64_t RunSummary::kept_in_cell(std::size_t x, std::size_t y) const {
  std::uint64_t n = 0;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) n += kept_counts[shape.index(x, y, a, b)];
  return n;
}

namespace {

struct Geometry {
  double delay_a;
  double delay_b;
  double window;
  double delta_t;
};

RunSummary empty_summary(const FransonConfig& config) {
  RunSummary s;
  s.shape = config.shape();
  s.seed = config.seed;
  s.pairs_per_cell.assign(s.shape.settings_a * s.shape.settings_b, 0);
  s.kept_counts.assign(s.shape.size(), 0);
  return s;
}

void accumulate(RunSummary& into, const RunSummary& part) {
  into.n_pairs += part.n_pairs;
  into.both_detected += part.both_detected;
  into.early += part.early;
  into.central += part.central;
  into.late += part.late;
  into.kept += part.kept;
  for (std::size_t k = 0; k < into.pairs_per_cell.size(); ++k) into.pairs_per_cell[k] += part.pairs_per_cell[k];
  for (std::size_t k = 0; k < into.kept_counts.size(); ++k) into.kept_counts[k] += part.kept_counts[k];
}

// One pair. The number of draws per pair is fixed so the stream position
// depends only on the pair index.
PairRecord simulate_pair(const FransonConfig& config, const Geometry& g, std::uint64_t index,
                         numeric::RngStream& rng) {
  const std::size_t nx = config.phases_a.size();
  const std::size_t ny = config.phases_b.size();
  PairRecord r;
  r.index = index;
  if (config.setting_mode == SettingMode::Scan) {
    const auto cells = static_cast<unsigned __int128>(nx * ny);
    const auto cell = static_cast<std::size_t>(static_cast<unsigned __int128>(index) * cells / config.n_pairs);
    r.x = cell / ny;
    r.y = cell % ny;
  } else {
    r.x = static_cast<std::size_t>(rng.below(nx));
    r.y = static_cast<std::size_t>(rng.below(ny));
  }

  r.path_a = rng.uniform() < 0.5 ? PathChoice::Short : PathChoice::Long;
  r.path_b = rng.uniform() < 0.5 ? PathChoice::Short : PathChoice::Long;
  r.detected_a = rng.bernoulli(config.detector_efficiency);
  r.detected_b = rng.bernoulli(config.detector_efficiency);
  const double u_corr = rng.uniform();
  const double u_sign = rng.uniform();

  r.arrival_a = g.delay_a + (r.path_a == PathChoice::Long ? g.delta_t : 0.0);
  r.arrival_b = g.delay_b + (r.path_b == PathChoice::Long ? g.delta_t : 0.0);
  const double offset = (r.arrival_a - r.arrival_b) - (g.delay_a - g.delay_b);
  if (std::abs(offset) <= g.window / 2.0) {
    r.slot = CoincidenceSlot::Central;
  } else {
    r.slot = offset < 0.0 ? CoincidenceSlot::Early : CoincidenceSlot::Late;
  }

  r.outcome_a = u_sign < 0.5 ? 1 : -1;
  if (r.slot == CoincidenceSlot::Central) {
    // Short-short and long-long amplitudes interfere; visibility mixes in
    // uniform noise.
    const double e = config.visibility * std::cos(config.phases_a[r.x] + config.phases_b[r.y]);
    const bool equal = u_corr < (1.0 + e) / 2.0;
    r.outcome_b = equal ? r.outcome_a : -r.outcome_a;
  } else {
    r.outcome_b = u_corr < 0.5 ? 1 : -1;
  }
  r.kept = r.detected_a && r.detected_b && r.slot == CoincidenceSlot::Central;
  return r;
}

void tally(RunSummary& s, const PairRecord& r) {
  ++s.n_pairs;
  ++s.pairs_per_cell[r.x * s.shape.settings_b + r.y];
  if (!(r.detected_a && r.detected_b)) return;
  ++s.both_detected;
  switch (r.slot) {
    case CoincidenceSlot::Early:
      ++s.early;
      break;
    case CoincidenceSlot::Central:
      ++s.central;
      break;
    case CoincidenceSlot::Late:
      ++s.late;
      break;
  }
  if (!r.kept) return;
  ++s.kept;
  const std::size_t a = r.outcome_a == 1 ? 0 : 1;
  const std::size_t b = r.outcome_b == 1 ? 0 : 1;
  ++s.kept_counts[s.shape.index(r.x, r.y, a, b)];
}

RunSummary simulate_chunk(const FransonConfig& config, const Geometry& g, std::uint64_t chunk, const RecordSink* sink) {
  RunSummary part = empty_summary(config);
  numeric::RngStream rng(config.seed, chunk);
  const std::uint64_t begin = chunk * kChunkPairs;
  const std::uint64_t end = std::min(config.n_pairs, begin + kChunkPairs);
  for (std::uint64_t i = begin; i < end; ++i) {
    const PairRecord r = simulate_pair(config, g, i, rng);
    if (sink != nullptr && *sink) (*sink)(r);
    tally(part, r);
  }
  return part;
}

}  // namespace

RunSummary simulate_run(const FransonConfig& config, unsigned workers, const RecordSink& sink) {
  config.validate();
  if (config.n_pairs == 0) throw DomainError("n_pairs must be positive");

  const Geometry g{config.fiber_length_a * config.refractive_index / spacetime::kSpeedOfLight,
                   config.fiber_length_b * config.refractive_index / spacetime::kSpeedOfLight, config.window(),
                   config.delta_t};
  const std::uint64_t chunks = (config.n_pairs + kChunkPairs - 1) / kChunkPairs;
  RunSummary total = empty_summary(config);

  if (sink || workers <= 1 || chunks == 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) accumulate(total, simulate_chunk(config, g, c, &sink));
    return total;
  }

  const unsigned threads = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));
  std::vector<RunSummary> partial(threads, empty_summary(config));
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::uint64_t c = t; c < chunks; c += threads) accumulate(partial[t], simulate_chunk(config, g, c, nullptr));
    });
  }
  for (auto& th : pool) th.join();
  for (const RunSummary& p : partial) accumulate(total, p);
  return total;
}

CorrelationTable empirical_table(const RunSummary& summary, TableEstimator estimator) {
  const TableShape& shape = summary.shape;
  for (std::size_t x = 0; x < shape.settings_a; ++x) {
    for (std::size_t y = 0; y < shape.settings_b; ++y) {
      if (summary.kept_in_cell(x, y) == 0) {
        throw ValidationError("no kept coincidences for setting pair (" + std::to_string(x) + ", " + std::to_string(y) + ")");
      }
    }
  }

  std::vector<double> probs(shape.size());
  if (estimator == TableEstimator::Raw) {
    for (std::size_t x = 0; x < shape.settings_a; ++x) {
      for (std::size_t y = 0; y < shape.settings_b; ++y) {
        const double n = static_cast<double>(summary.kept_in_cell(x, y));
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t b = 0; b < 2; ++b) {
            const std::size_t k = shape.index(x, y, a, b);
            probs[k] = static_cast<double>(summary.kept_counts[k]) / n;
          }
      }
    }
    return {shape, std::move(probs)};
  }

  const bool b_fixed = shape.settings_b == 1;
  if (!b_fixed && shape.settings_a != 1) {
    throw NotApplicable("the no-signaling estimate is defined for scans with one fixed side");
  }
  // Work in "fixed side = B" coordinates; remote settings r, fixed outcome f.
  const std::size_t remote = b_fixed ? shape.settings_a : shape.settings_b;
  auto count = [&](std::size_t r, std::size_t own, std::size_t fixed) -> double {
    const std::size_t k = b_fixed ? shape.index(r, 0, own, fixed) : shape.index(0, r, fixed, own);
    return static_cast<double>(summary.kept_counts[k]);
  };
  double total = 0.0;
  std::vector<double> fixed_counts(2, 0.0);
  for (std::size_t r = 0; r < remote; ++r)
    for (std::size_t own = 0; own < 2; ++own)
      for (std::size_t f = 0; f < 2; ++f) {
        fixed_counts[f] += count(r, own, f);
        total += count(r, own, f);
      }
  for (std::size_t r = 0; r < remote; ++r) {
    for (std::size_t f = 0; f < 2; ++f) {
      const double q = fixed_counts[f] / total;
      const double n_rf = count(r, 0, f) + count(r, 1, f);
      for (std::size_t own = 0; own < 2; ++own) {
        // With no data for (r, f) any conditional is a maximizer; take uniform.
        const double conditional = n_rf > 0.0 ? count(r, own, f) / n_rf : 0.5;
        const std::size_t k = b_fixed ? shape.index(r, 0, own, f) : shape.index(0, r, f, own);
        probs[k] = q * conditional;
      }
    }
  }
  return {shape, std::move(probs)};
}

correlations::NoSignalingReport empirical_no_signaling(const RunSummary& summary, double n_sigma) {
  const TableShape& s = summary.shape;
  correlations::NoSignalingReport report;
  // marginal counts of one side's outcome 0 and its cell total
  auto marginal = [&](MarginalSide side, std::size_t own, std::size_t remote) {
    const std::size_t x = side == MarginalSide::A ? own : remote;
    const std::size_t y = side == MarginalSide::A ? remote : own;
    double zero = 0.0;
    for (std::size_t o = 0; o < 2; ++o) {
      zero += static_cast<double>(side == MarginalSide::A ? summary.kept_counts[s.index(x, y, 0, o)]
                                                          : summary.kept_counts[s.index(x, y, o, 0)]);
    }
    return std::pair<double, double>{zero, static_cast<double>(summary.kept_in_cell(x, y))};
  };
  auto compare = [&](MarginalSide side, std::size_t own, std::size_t r1, std::size_t r2) {
    const auto [k1, n1] = marginal(side, own, r1);
    const auto [k2, n2] = marginal(side, own, r2);
    if (n1 == 0.0 || n2 == 0.0) return;
    const double p1 = k1 / n1;
    const double p2 = k2 / n2;
    const double pooled = (k1 + k2) / (n1 + n2);
    const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2));
    const double dev = std::abs(p1 - p2);
    report.max_deviation = std::max(report.max_deviation, dev);
    const bool violated = se > 0.0 ? dev > n_sigma * se : dev > 0.0;
    if (violated) report.violations.push_back({side, own, r1, r2, dev});
  };
  for (std::size_t x = 0; x < s.settings_a; ++x)
    for (std::size_t y1 = 0; y1 < s.settings_b; ++y1)
      for (std::size_t y2 = y1 + 1; y2 < s.settings_b; ++y2) compare(MarginalSide::A, x, y1, y2);
  for (std::size_t y = 0; y < s.settings_b; ++y)
    for (std::size_t x1 = 0; x1 < s.settings_a; ++x1)
      for (std::size_t x2 = x1 + 1; x2 < s.settings_a; ++x2) compare(MarginalSide::B, y, x1, x2);
  return report;
}

FringeScan scan_fringe(const FransonConfig& config, unsigned workers) {
  if (config.phases_b.size() != 1) throw DomainError("a fringe scan keeps the remote phase fixed (one phase_b)");
  FringeScan scan;
  scan.phase_b = config.phases_b.front();
  scan.summary = simulate_run(config, workers);
  const TableShape& shape = scan.summary.shape;
  for (std::size_t x = 0; x < shape.settings_a; ++x) {
    FringePoint p;
    p.phase_a = config.phases_a[x];
    p.n_equal = scan.summary.kept_counts[shape.index(x, 0, 0, 0)] + scan.summary.kept_counts[shape.index(x, 0, 1, 1)];
    p.n_unequal = scan.summary.kept_counts[shape.index(x, 0, 0, 1)] + scan.summary.kept_counts[shape.index(x, 0, 1, 0)];
    p.n_kept = p.n_equal + p.n_unequal;
    if (p.n_kept > 0) {
      const double n = static_cast<double>(p.n_kept);
      p.e_hat = (static_cast<double>(p.n_equal) - static_cast<double>(p.n_unequal)) / n;
      p.sigma = std::sqrt(std::max(0.0, 1.0 - p.e_hat * p.e_hat) / n);
    }
    scan.points.push_back(p);
  }
  return scan;
}

FringeFit fit_fringe(const FringeScan& scan) {
  double scc = 0.0, sss = 0.0, scs = 0.0, sec = 0.0, ses = 0.0;
  std::size_t used = 0;
  for (const FringePoint& p : scan.points) {
    if (p.n_kept == 0) continue;
    const double theta = p.phase_a + scan.phase_b;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    scc += c * c;
    sss += s * s;
    scs += c * s;
    sec += p.e_hat * c;
    ses += p.e_hat * s;
    ++used;
  }
  const double det = scc * sss - scs * scs;
  if (used < 2 || std::abs(det) < 1e-12) throw DomainError("fringe fit needs at least two independent phases");
  const double alpha = (sec * sss - ses * scs) / det;
  const double beta = (ses * scc - sec * scs) / det;

  FringeFit fit;
  fit.amplitude = std::hypot(alpha, beta);
  fit.phase_offset = std::atan2(-beta, alpha);
  double sq = 0.0;
  double var = 0.0;
  for (const FringePoint& p : scan.points) {
    if (p.n_kept == 0) continue;
    const double theta = p.phase_a + scan.phase_b;
    const double r = p.e_hat - (alpha * std::cos(theta) + beta * std::sin(theta));
    sq += r * r;
    var += p.sigma * p.sigma;
  }
  fit.residual_rms = std::sqrt(sq / static_cast<double>(used));
  fit.mean_sigma = std::sqrt(var / static_cast<double>(used));
  return fit;
}

}  // namespace bellaudit::franson
