#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bellaudit/bell.hpp"
#include "bellaudit/correlations.hpp"
#include "bellaudit/spacetime.hpp"

namespace bellaudit::franson {

using correlations::CorrelationTable;
using correlations::TableShape;

enum class PathChoice { Short, Long };

// Scan: pair i goes to setting cell floor(i * |X||Y| / n_pairs), x major,
// so A sweeps its phases in time. Random: i.i.d. uniform settings per pair.
enum class SettingMode { Scan, Random };

struct FransonConfig {
  double delta_t = 1.2e-9;  // long-short arm imbalance, s
  double fiber_length_a = 17'500.0;
  double fiber_length_b = 17'500.0;
  double refractive_index = 1.468;
  std::vector<double> phases_a{0.0};  // rad
  std::vector<double> phases_b{0.0};
  double visibility = 1.0;
  double detector_efficiency = 1.0;
  double coincidence_window = 0.0;  // s; 0 selects delta_t / 2
  std::uint64_t n_pairs = 0;
  std::uint64_t seed = 0;
  SettingMode setting_mode = SettingMode::Scan;

  double window() const { return coincidence_window > 0.0 ? coincidence_window : delta_t / 2.0; }
  TableShape shape() const { return {phases_a.size(), phases_b.size(), 2, 2}; }

  // Throws ValidationError on broken invariants.
  void validate() const;
};

// E(x, y) = V cos(phi_a[x] + phi_b[y]) on the central-peak coincidences.
CorrelationTable quantum_postselected_table(const FransonConfig& config);

enum class CoincidenceSlot { Early, Central, Late };

struct PairRecord {
  std::uint64_t index = 0;
  std::size_t x = 0;
  std::size_t y = 0;
  PathChoice path_a = PathChoice::Short;
  PathChoice path_b = PathChoice::Short;
  bool detected_a = false;
  bool detected_b = false;
  // Detection times after emission, s.
  double arrival_a = 0.0;
  double arrival_b = 0.0;
  // Arrival-time difference relative to the fiber-delay difference.
  CoincidenceSlot slot = CoincidenceSlot::Central;
  int outcome_a = 1;
  int outcome_b = 1;
  bool kept = false;
};

struct RunSummary {
  TableShape shape;
  std::uint64_t seed = 0;
  std::uint64_t n_pairs = 0;
  std::uint64_t both_detected = 0;
  std::uint64_t early = 0;
  std::uint64_t central = 0;
  std::uint64_t late = 0;
  std::uint64_t kept = 0;
  std::vector<std::uint64_t> pairs_per_cell;  // [x][y]
  std::vector<std::uint64_t> kept_counts;     // [x][y][a][b]

  double kept_fraction() const { return n_pairs ? static_cast<double>(kept) / static_cast<double>(n_pairs) : 0.0; }
  std::uint64_t kept_in_cell(std::size_t x, std::size_t y) const;
  bool operator==(const RunSummary&) const = default;
};

inline constexpr std::uint64_t kChunkPairs = 1U << 16;

using RecordSink = std::function<void(const PairRecord&)>;

// Monte Carlo of n_pairs photon pairs. Chunk c of kChunkPairs pairs draws
// from rng_stream(seed, c), so the summary does not depend on `workers`.
// With a sink the records are produced in pair order on one thread.
RunSummary simulate_run(const FransonConfig& config, unsigned workers = 1, const RecordSink& sink = {});

enum class TableEstimator {
  Raw,
  // Maximum-likelihood table under no-signaling; defined when one side has
  // a single setting: P(b) pooled over the remote setting, P(a | x, b) raw.
  NoSignalingMle,
};

CorrelationTable empirical_table(const RunSummary& summary, TableEstimator estimator = TableEstimator::Raw);

// Two-proportion z-test of every marginal pair; a violation is reported when
// the difference exceeds n_sigma standard errors.
correlations::NoSignalingReport empirical_no_signaling(const RunSummary& summary, double n_sigma = 4.0);

struct FringePoint {
  double phase_a = 0.0;
  std::uint64_t n_kept = 0;
  std::uint64_t n_equal = 0;
  std::uint64_t n_unequal = 0;
  double e_hat = 0.0;
  double sigma = 0.0;  // binomial standard error of e_hat
};

struct FringeScan {
  double phase_b = 0.0;
  std::vector<FringePoint> points;
  RunSummary summary;
};

// Requires phases_b to hold exactly one phase.
FringeScan scan_fringe(const FransonConfig& config, unsigned workers = 1);

struct FringeFit {
  double amplitude = 0.0;
  double phase_offset = 0.0;  // e ~ amplitude * cos(phi_a + phi_b + offset)
  double residual_rms = 0.0;
  double mean_sigma = 0.0;
};

// Linear least squares on the cos/sin basis.
FringeFit fit_fringe(const FringeScan& scan);

enum class StrategyClass { SettingDependentPath, FixedPath };

// Local strategy for a Franson experiment: each photon carries a preset
// outcome and a preset interferometer path, possibly setting-dependent.
struct PathStrategy {
  std::vector<int> outcome_a;  // +-1 per x
  std::vector<int> outcome_b;  // +-1 per y
  std::vector<PathChoice> path_a;
  std::vector<PathChoice> path_b;
  StrategyClass strategy_class = StrategyClass::SettingDependentPath;

  // FixedPath strategies must use one path for all settings on each side.
  void validate() const;
  bool kept(std::size_t x, std::size_t y) const { return path_a[x] == path_b[y]; }
};

struct WeightedPathStrategy {
  double weight = 0.0;
  PathStrategy strategy;
};

// sum_xy c_xy E_ps(x, y) with E_ps the correlator on the kept (equal-path)
// subensemble. Throws EmptyCell when some (x, y) keeps no weight.
double postselected_value(std::span<const WeightedPathStrategy> mixture, const bell::BellExpression& expr);

struct PostselectedSearchOptions {
  // Raw strategy count cap (4^|X| 4^|Y| or 4 2^|X| 2^|Y|).
  std::size_t max_strategies = 4096;
  std::size_t weight_grid = 64;
  // Distinct strategies taken from the best pairs into the refinement.
  std::size_t refine_strategies = 8;
  std::uint64_t seed = 0;
};

struct PostselectedBound {
  double value = 0.0;  // exact re-evaluation of the witness
  double grid_value = 0.0;
  std::vector<WeightedPathStrategy> witness;
  std::size_t distinct_strategies = 0;
};

PostselectedBound search_postselected_bound(const bell::BellExpression& expr, StrategyClass strategy_class,
                                            std::size_t budget, const PostselectedSearchOptions& options = {});

struct StationGeometry {
  spacetime::Vec3 source{0.0, 0.0, 0.0};
  spacetime::Vec3 station_a{0.0, 0.0, 0.0};
  spacetime::Vec3 station_b{0.0, 0.0, 0.0};
};

struct SwitchingConstraint {
  std::string name;
  double window = 0.0;    // s; <= 0 means no admissible time
  double rate_hz = 0.0;   // 1 / window, inf when window <= 0
};

// Rule-based requirement: the setting must change within one arm imbalance,
// and each side's choice must fall outside the past light cone of the remote
// outcome and outside the future light cone of the emission.
struct SwitchingRequirement {
  double min_rate_hz = 0.0;
  std::string binding;
  bool feasible = true;
  std::vector<SwitchingConstraint> constraints;
};

SwitchingRequirement required_switching_rate(const FransonConfig& config, const StationGeometry& geometry);

}  // namespace bellaudit::franson
