#include <cmath>

#include "bellaudit/errors.hpp"
#include "bellaudit/franson.hpp"

namespace bellaudit::franson {

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void FransonConfig::validate() const {
  if (!(delta_t > 0.0) || !std::isfinite(delta_t)) throw ValidationError("delta_t must be positive");
  if (coincidence_window < 0.0 || !std::isfinite(coincidence_window)) {
    throw ValidationError("coincidence_window must be non-negative");
  }
  if (!(delta_t > window() / 2.0)) throw ValidationError("delta_t must exceed half the coincidence window");
  if (!(fiber_length_a >= 0.0) || !(fiber_length_b >= 0.0)) throw ValidationError("fiber lengths must be non-negative");
  if (!(refractive_index >= 1.0)) throw ValidationError("refractive_index must be at least 1");
  if (phases_a.empty() || phases_b.empty()) throw ValidationError("phase lists must be non-empty");
  if (!all_finite(phases_a) || !all_finite(phases_b)) throw ValidationError("phases must be finite");
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw ValidationError("visibility must lie in [0, 1]");
  if (!(detector_efficiency > 0.0 && detector_efficiency <= 1.0)) {
    throw ValidationError("detector_efficiency must lie in (0, 1]");
  }
}

CorrelationTable quantum_postselected_table(const FransonConfig& config) {
  config.validate();
  const TableShape shape = config.shape();
  std::vector<double> probs(shape.size());
  for (std::size_t x = 0; x < shape.settings_a; ++x) {
    for (std::size_t y = 0; y < shape.settings_b; ++y) {
      const double e = config.visibility * std::cos(config.phases_a[x] + config.phases_b[y]);
      const double equal = (1.0 + e) / 4.0;
      const double unequal = (1.0 - e) / 4.0;
      probs[shape.index(x, y, 0, 0)] = equal;
      probs[shape.index(x, y, 1, 1)] = equal;
      probs[shape.index(x, y, 0, 1)] = unequal;
      probs[shape.index(x, y, 1, 0)] = unequal;
    }
  }
  return {shape, std::move(probs)};
}

}  // namespace bellaudit::franson
