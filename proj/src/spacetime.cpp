#include "bellaudit/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bellaudit/errors.hpp"

namespace bellaudit::spacetime {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Emission:
      return "Emission";
    case EventKind::SettingChoice:
      return "SettingChoice";
    case EventKind::Outcome:
      return "Outcome";
  }
  return "?";
}

std::string_view to_string(Side side) {
  switch (side) {
    case Side::A:
      return "A";
    case Side::B:
      return "B";
    case Side::Source:
      return "Source";
  }
  return "?";
}

std::string_view to_string(IntervalClass cls) {
  switch (cls) {
    case IntervalClass::Timelike:
      return "Timelike";
    case IntervalClass::Lightlike:
      return "Lightlike";
    case IntervalClass::Spacelike:
      return "Spacelike";
  }
  return "?";
}

std::string_view finding_code(Finding finding) {
  switch (finding) {
    case Finding::SingleSettingNoBellTest:
      return "SINGLE_SETTING_NO_BELL_TEST";
    case Finding::ChoiceNotSpacelikeFromRemoteOutcome:
      return "CHOICE_NOT_SPACELIKE_FROM_REMOTE_OUTCOME";
    case Finding::OutcomesNotSpacelike:
      return "OUTCOMES_NOT_SPACELIKE";
    case Finding::PostselectionPresentChshInvalid:
      return "POSTSELECTION_PRESENT_CHSH_INVALID";
    case Finding::Ok:
      return "OK";
  }
  return "?";
}

namespace {

double distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace

double interval_squared(const Event& e1, const Event& e2) {
  const double dt = e2.time - e1.time;
  const double dx = e2.position[0] - e1.position[0];
  const double dy = e2.position[1] - e1.position[1];
  const double dz = e2.position[2] - e1.position[2];
  const double cdt = kSpeedOfLight * dt;
  return cdt * cdt - (dx * dx + dy * dy + dz * dz);
}

IntervalClass classify(const Event& e1, const Event& e2, double tolerance) {
  const double s2 = interval_squared(e1, e2);
  if (s2 < -tolerance) return IntervalClass::Spacelike;
  if (s2 > tolerance) return IntervalClass::Timelike;
  return IntervalClass::Lightlike;
}

double min_influence_speed(const Event& e1, const Event& e2) {
  const double dx = distance(e1.position, e2.position);
  const double dt = std::abs(e2.time - e1.time);
  if (dx == 0.0) return 0.0;
  if (dt == 0.0) return INFINITY;
  return dx / dt / kSpeedOfLight;
}

Event lorentz_boost(const Event& e, const Vec3& beta) {
  const double b2 = dot3(beta, beta);
  if (!(b2 < 1.0)) throw DomainError("boost requires |beta| < 1");
  if (b2 == 0.0) return e;
  const double gamma = 1.0 / std::sqrt(1.0 - b2);
  const double ct = kSpeedOfLight * e.time;
  const double bx = dot3(beta, e.position);
  Event out = e;
  const double ct_prime = gamma * (ct - bx);
  const double spatial = (gamma - 1.0) * bx / b2 - gamma * ct;
  for (int i = 0; i < 3; ++i) out.position[i] = e.position[i] + spatial * beta[i];
  out.time = ct_prime / kSpeedOfLight;
  return out;
}

std::vector<FrameSpeed> frame_speed_scan(const Event& e1, const Event& e2, std::span<const Vec3> betas) {
  std::vector<FrameSpeed> out;
  out.reserve(betas.size());
  for (const Vec3& beta : betas) {
    out.push_back({beta, min_influence_speed(lorentz_boost(e1, beta), lorentz_boost(e2, beta))});
  }
  return out;
}

void ExperimentSchedule::validate() const {
  if (events.empty()) throw DomainError("experiment schedule has no events");
  if (settings_count_a < 1 || settings_count_b < 1) throw ValidationError("settings counts must be positive");
  std::set<std::string> labels;
  int emissions = 0;
  bool outcome_a = false;
  bool outcome_b = false;
  for (const Event& e : events) {
    if (!labels.insert(e.label).second) throw ValidationError("duplicate event label: " + e.label);
    if (!std::isfinite(e.time) || !std::all_of(e.position.begin(), e.position.end(), [](double v) { return std::isfinite(v); })) {
      throw ValidationError("non-finite coordinates on event " + e.label);
    }
    if (e.time < 0.0) throw ValidationError("negative time on event " + e.label);
    if (e.kind == EventKind::Emission) ++emissions;
    if (e.kind == EventKind::Outcome && e.side == Side::A) outcome_a = true;
    if (e.kind == EventKind::Outcome && e.side == Side::B) outcome_b = true;
    if (e.kind != EventKind::Emission && e.side == Side::Source) {
      throw ValidationError("event " + e.label + " must belong to side A or B");
    }
  }
  if (emissions > 1) throw ValidationError("at most one Emission event is allowed");
  if (!outcome_a || !outcome_b) throw ValidationError("each side needs at least one Outcome event");
}

bool AuditReport::ok() const { return findings.size() == 1 && findings.front().finding == Finding::Ok; }

bool AuditReport::has(Finding f) const {
  return std::any_of(findings.begin(), findings.end(), [f](const FindingEntry& e) { return e.finding == f; });
}

const PairClassification* AuditReport::pair(std::string_view a, std::string_view b) const {
  for (const PairClassification& p : pairs) {
    if ((p.first == a && p.second == b) || (p.first == b && p.second == a)) return &p;
  }
  return nullptr;
}

AuditReport audit_experiment(const ExperimentSchedule& schedule, double tolerance) {
  schedule.validate();
  AuditReport report;
  const auto& events = schedule.events;
  for (std::size_t i = 0; i < events.size(); ++i) {
    for (std::size_t j = i + 1; j < events.size(); ++j) {
      report.pairs.push_back({events[i].label, events[j].label, classify(events[i], events[j], tolerance),
                              interval_squared(events[i], events[j]), min_influence_speed(events[i], events[j])});
    }
  }

  if (schedule.settings_count_a < 2 || schedule.settings_count_b < 2) {
    report.findings.push_back({Finding::SingleSettingNoBellTest,
                               "settings: A=" + std::to_string(schedule.settings_count_a) +
                                   ", B=" + std::to_string(schedule.settings_count_b) +
                                   "; a fixed setting admits a common-cause model for all data, and every bipartite "
                                   "Bell inequality needs at least two settings per side"});
  }

  std::vector<std::string> choice_problems;
  for (const Side side : {Side::A, Side::B}) {
    const int count = side == Side::A ? schedule.settings_count_a : schedule.settings_count_b;
    const bool has_choice = std::any_of(events.begin(), events.end(), [side](const Event& e) {
      return e.kind == EventKind::SettingChoice && e.side == side;
    });
    if (count >= 2 && !has_choice) {
      choice_problems.push_back("side " + std::string(to_string(side)) + " has " + std::to_string(count) +
                                " settings but no SettingChoice event");
    }
  }
  for (const Event& choice : events) {
    if (choice.kind != EventKind::SettingChoice) continue;
    for (const Event& outcome : events) {
      if (outcome.kind != EventKind::Outcome || outcome.side == choice.side) continue;
      const IntervalClass cls = classify(choice, outcome, tolerance);
      if (cls != IntervalClass::Spacelike) {
        choice_problems.push_back(choice.label + " -> " + outcome.label + " is " + std::string(to_string(cls)));
      }
    }
  }
  if (!choice_problems.empty()) {
    std::string detail = "setting choice not space-like separated from remote outcome: ";
    for (std::size_t k = 0; k < choice_problems.size(); ++k) detail += (k ? "; " : "") + choice_problems[k];
    report.findings.push_back({Finding::ChoiceNotSpacelikeFromRemoteOutcome, detail});
  }

  std::vector<std::string> outcome_problems;
  for (const Event& a : events) {
    if (a.kind != EventKind::Outcome || a.side != Side::A) continue;
    for (const Event& b : events) {
      if (b.kind != EventKind::Outcome || b.side != Side::B) continue;
      const IntervalClass cls = classify(a, b, tolerance);
      if (cls != IntervalClass::Spacelike) outcome_problems.push_back(a.label + " / " + b.label + " is " + std::string(to_string(cls)));
    }
  }
  if (!outcome_problems.empty()) {
    std::string detail = "outcomes not space-like separated: ";
    for (std::size_t k = 0; k < outcome_problems.size(); ++k) detail += (k ? "; " : "") + outcome_problems[k];
    report.findings.push_back({Finding::OutcomesNotSpacelike, detail});
  }

  if (schedule.postselection && schedule.inequality == AnalysisInequality::Chsh) {
    report.findings.push_back({Finding::PostselectionPresentChshInvalid,
                               "CHSH evaluated on a postselected subensemble; local models reach the algebraic "
                               "maximum 4 there, so a chained inequality is required"});
  }

  if (report.findings.empty()) report.findings.push_back({Finding::Ok, "all causal-separation checks passed"});
  return report;
}

}  // namespace bellaudit::spacetime
