#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bellaudit::spacetime {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s, exact
inline constexpr double kDefaultIntervalTolerance = 1.0;  // m^2 on s^2

using Vec3 = std::array<double, 3>;

enum class EventKind { Emission, SettingChoice, Outcome };
enum class Side { A, B, Source };
enum class IntervalClass { Timelike, Lightlike, Spacelike };

std::string_view to_string(EventKind kind);
std::string_view to_string(Side side);
std::string_view to_string(IntervalClass cls);

// Lab-frame spacetime point. Coordinates in meters, time in seconds on a
// shared clock.
struct Event {
  std::string label;
  EventKind kind = EventKind::Outcome;
  Side side = Side::Source;
  Vec3 position{0.0, 0.0, 0.0};
  double time = 0.0;
};

// s^2 = c^2 dt^2 - |dx|^2, signature (+,-,-,-).
double interval_squared(const Event& e1, const Event& e2);

IntervalClass classify(const Event& e1, const Event& e2, double tolerance = kDefaultIntervalTolerance);

// (|dx| / |dt|) / c; +inf for distinct simultaneous events, 0 when colocated.
double min_influence_speed(const Event& e1, const Event& e2);

// Boost into the frame moving with velocity beta*c relative to the lab.
// Throws DomainError unless |beta| < 1.
Event lorentz_boost(const Event& e, const Vec3& beta);

struct FrameSpeed {
  Vec3 beta;
  double speed;  // units of c
};

std::vector<FrameSpeed> frame_speed_scan(const Event& e1, const Event& e2, std::span<const Vec3> betas);

enum class Finding {
  SingleSettingNoBellTest,
  ChoiceNotSpacelikeFromRemoteOutcome,
  OutcomesNotSpacelike,
  PostselectionPresentChshInvalid,
  Ok,
};

std::string_view finding_code(Finding finding);

// Which correlation test the experiment's analysis uses.
enum class AnalysisInequality { Chsh, Chained };

struct ExperimentSchedule {
  std::vector<Event> events;
  int settings_count_a = 1;
  int settings_count_b = 1;
  // Analysis restricted to a postselected subensemble (Franson central peak).
  bool postselection = false;
  AnalysisInequality inequality = AnalysisInequality::Chsh;

  // Throws DomainError when empty, ValidationError on broken invariants.
  void validate() const;
};

struct PairClassification {
  std::string first;
  std::string second;
  IntervalClass interval;
  double interval_squared;
  double min_speed;
};

struct FindingEntry {
  Finding finding;
  std::string detail;
};

struct AuditReport {
  std::vector<PairClassification> pairs;  // every unordered pair, schedule order
  std::vector<FindingEntry> findings;

  bool ok() const;
  bool has(Finding f) const;
  const PairClassification* pair(std::string_view a, std::string_view b) const;
};

// Only Emission, SettingChoice and Outcome events are considered relevant.
AuditReport audit_experiment(const ExperimentSchedule& schedule, double tolerance = kDefaultIntervalTolerance);

}  // namespace bellaudit::spacetime
