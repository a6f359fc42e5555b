#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace bellaudit::numeric {

using Objective = std::function<double(std::span<const double>)>;

struct PatternSearchOptions {
  // Restart points are drawn uniformly from [lower, upper]^dims.
  double lower = -10.0;
  double upper = 10.0;
  // Initial step as a fraction of (upper - lower).
  double initial_step_fraction = 0.25;
  double min_step = 1e-10;
  std::size_t max_evaluations_per_restart = 200'000;
  // Optional fixed starting point for restart 0.
  std::vector<double> start;
};

struct MinimizeResult {
  std::vector<double> point;
  double value = 0.0;
  std::size_t evaluations = 0;
};

// Compass (coordinate pattern) search with step halving; `budget` is the number
// of restarts. Points are drawn from rng_stream(seed, restart index), so the
// result is a deterministic function of (f, dims, budget, seed, options).
MinimizeResult minimize_free(const Objective& f, std::size_t dims, std::size_t budget, std::uint64_t seed,
                             const PatternSearchOptions& options = {});

}  // namespace bellaudit::numeric
