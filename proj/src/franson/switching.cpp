#include <cmath>

#include "bellaudit/errors.hpp"
#include "bellaudit/franson.hpp"

namespace bellaudit::franson {

namespace {

double distance(const spacetime::Vec3& p, const spacetime::Vec3& q) {
  return std::hypot(p[0] - q[0], p[1] - q[1], p[2] - q[2]);
}

SwitchingConstraint from_window(std::string name, double window) {
  return {std::move(name), window, window > 0.0 ? 1.0 / window : INFINITY};
}

}  // namespace

SwitchingRequirement required_switching_rate(const FransonConfig& config, const StationGeometry& geometry) {
  config.validate();
  constexpr double c = spacetime::kSpeedOfLight;
  const double d_sa = distance(geometry.source, geometry.station_a);
  const double d_sb = distance(geometry.source, geometry.station_b);
  const double d_ab = distance(geometry.station_a, geometry.station_b);
  if (config.fiber_length_a < d_sa || config.fiber_length_b < d_sb) {
    throw ValidationError("fiber shorter than the straight-line source-station distance");
  }
  // Outcomes happen on photon arrival; emission is at t = 0 at the source.
  const double t_a = config.fiber_length_a * config.refractive_index / c;
  const double t_b = config.fiber_length_b * config.refractive_index / c;

  // A choice at station A must come after the past light cone of B's outcome
  // leaves A (t > t_b - d_ab / c), before the emission's light cone arrives
  // (t < d_sa / c), and before A's own outcome.
  SwitchingRequirement req;
  req.constraints.push_back(from_window("arm imbalance", config.delta_t));
  req.constraints.push_back(from_window("light cone A", std::min(t_a, d_sa / c) - (t_b - d_ab / c)));
  req.constraints.push_back(from_window("light cone B", std::min(t_b, d_sb / c) - (t_a - d_ab / c)));

  for (const SwitchingConstraint& k : req.constraints) {
    if (k.window <= 0.0) req.feasible = false;
    if (req.binding.empty() || k.rate_hz > req.min_rate_hz) {
      req.min_rate_hz = k.rate_hz;
      req.binding = k.name;
    }
  }
  return req;
}

}  // namespace bellaudit::franson
