#include "bellaudit/optimize.hpp"

#include <cmath>

#include "bellaudit/errors.hpp"
#include "bellaudit/rng.hpp"

namespace bellaudit::numeric {

namespace {

struct LocalResult {
  std::vector<double> point;
  double value;
  std::size_t evaluations;
};

LocalResult compass_search(const Objective& f, std::vector<double> x, double step, const PatternSearchOptions& options) {
  std::size_t evaluations = 1;
  double fx = f(x);
  std::vector<double> trial = x;
  while (step >= options.min_step && evaluations < options.max_evaluations_per_restart) {
    bool improved = false;
    for (std::size_t d = 0; d < x.size() && evaluations < options.max_evaluations_per_restart; ++d) {
      for (const double direction : {1.0, -1.0}) {
        trial[d] = x[d] + direction * step;
        const double ft = f(trial);
        ++evaluations;
        if (ft < fx) {
          fx = ft;
          x[d] = trial[d];
          improved = true;
          break;
        }
        trial[d] = x[d];
      }
    }
    if (!improved) step *= 0.5;
  }
  return {std::move(x), fx, evaluations};
}

}  // namespace

MinimizeResult minimize_free(const Objective& f, std::size_t dims, std::size_t budget, std::uint64_t seed,
                             const PatternSearchOptions& options) {
  if (budget == 0) throw DomainError("optimizer budget must be positive");
  if (dims == 0) throw DomainError("optimizer needs at least one dimension");
  if (!options.start.empty() && options.start.size() != dims) throw ShapeMismatch("start point has wrong dimension");

  const double width = options.upper - options.lower;
  MinimizeResult best;
  best.value = INFINITY;
  for (std::size_t restart = 0; restart < budget; ++restart) {
    std::vector<double> x(dims);
    if (restart == 0 && !options.start.empty()) {
      x = options.start;
    } else {
      RngStream rng(seed, restart);
      for (double& xi : x) xi = options.lower + width * rng.uniform();
    }
    LocalResult local = compass_search(f, std::move(x), options.initial_step_fraction * width, options);
    best.evaluations += local.evaluations;
    if (best.point.empty() || local.value < best.value) {
      best.point = std::move(local.point);
      best.value = local.value;
    }
  }
  return best;
}

}  // namespace bellaudit::numeric
