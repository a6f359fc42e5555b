#include "bellaudit/config.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace bellaudit::config {

using io::Json;

namespace {

std::string join(const std::vector<std::string>& lines) {
  std::string out = "invalid config";
  for (const std::string& l : lines) out += "\n  " + l;
  return out;
}

class Reader {
 public:
  std::vector<std::string> diagnostics;

  void fail(const std::string& where, const std::string& message) { diagnostics.push_back(where + ": " + message); }

  bool object(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      fail(where, "expected an object");
      return false;
    }
    for (const auto& [key, value] : j.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        fail(where + "." + key, "unknown field");
      }
    }
    return true;
  }

  std::optional<double> number(const Json& j, const char* key, const std::string& where, bool required) {
    const auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(where + "." + key, "missing");
      return std::nullopt;
    }
    if (!it->is_number() || !std::isfinite(it->get<double>())) {
      fail(where + "." + key, "expected a finite number");
      return std::nullopt;
    }
    return it->get<double>();
  }

  std::optional<std::uint64_t> unsigned_int(const Json& j, const char* key, const std::string& where, bool required) {
    const auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(where + "." + key, "missing");
      return std::nullopt;
    }
    if (!it->is_number_unsigned()) {
      fail(where + "." + key, "expected a non-negative integer");
      return std::nullopt;
    }
    return it->get<std::uint64_t>();
  }

  std::optional<std::string> string(const Json& j, const char* key, const std::string& where, bool required) {
    const auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(where + "." + key, "missing");
      return std::nullopt;
    }
    if (!it->is_string()) {
      fail(where + "." + key, "expected a string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  std::optional<bool> boolean(const Json& j, const char* key, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (!it->is_boolean()) {
      fail(where + "." + key, "expected true or false");
      return std::nullopt;
    }
    return it->get<bool>();
  }

  // Angle given as exactly one of `<stem>_rad` or `<stem>_deg`.
  std::optional<double> angle(const Json& j, const std::string& stem, const std::string& where, bool required) {
    const std::string rad = stem + "_rad";
    const std::string deg = stem + "_deg";
    const bool has_rad = j.contains(rad);
    const bool has_deg = j.contains(deg);
    if (has_rad && has_deg) {
      fail(where + "." + stem, "give either " + rad + " or " + deg + ", not both");
      return std::nullopt;
    }
    if (!has_rad && !has_deg) {
      if (required) fail(where + "." + rad, "missing");
      return std::nullopt;
    }
    const auto v = number(j, has_rad ? rad.c_str() : deg.c_str(), where, true);
    if (!v) return std::nullopt;
    return has_rad ? *v : *v * std::numbers::pi / 180.0;
  }

  std::optional<std::vector<double>> phases(const Json& j, const std::string& side, const std::string& where) {
    const std::string rad = "phases_" + side + "_rad";
    const std::string deg = "phases_" + side + "_deg";
    const std::string scan = "phases_" + side + "_scan";
    const int given = j.contains(rad) + j.contains(deg) + j.contains(scan);
    if (given == 0) return std::nullopt;
    if (given > 1) {
      fail(where + ".phases_" + side, "give exactly one of " + rad + ", " + deg + ", " + scan);
      return std::nullopt;
    }
    if (!j.contains(scan)) {
      const bool is_deg = j.contains(deg);
      const Json& list = j.at(is_deg ? deg : rad);
      const std::string at = where + "." + (is_deg ? deg : rad);
      if (!list.is_array() || list.empty()) {
        fail(at, "expected a non-empty array of numbers");
        return std::nullopt;
      }
      std::vector<double> out;
      for (const Json& v : list) {
        if (!v.is_number() || !std::isfinite(v.get<double>())) {
          fail(at, "expected finite numbers");
          return std::nullopt;
        }
        out.push_back(is_deg ? v.get<double>() * std::numbers::pi / 180.0 : v.get<double>());
      }
      return out;
    }
    const Json& s = j.at(scan);
    const std::string at = where + "." + scan;
    if (!object(s, at, {"count", "start_rad", "start_deg", "span_rad", "span_deg"})) return std::nullopt;
    const auto count = unsigned_int(s, "count", at, true);
    const double start = angle(s, "start", at, false).value_or(0.0);
    const auto span = angle(s, "span", at, false);
    if (!count) return std::nullopt;
    if (*count == 0) {
      fail(at + ".count", "must be positive");
      return std::nullopt;
    }
    // Endpoint excluded, so a full-circle span does not repeat the start.
    const double width = span.value_or(2.0 * std::numbers::pi);
    std::vector<double> out(*count);
    for (std::uint64_t i = 0; i < *count; ++i) {
      out[i] = start + width * static_cast<double>(i) / static_cast<double>(*count);
    }
    return out;
  }
};

std::optional<spacetime::EventKind> parse_kind(const std::string& s) {
  if (s == "Emission") return spacetime::EventKind::Emission;
  if (s == "SettingChoice") return spacetime::EventKind::SettingChoice;
  if (s == "Outcome") return spacetime::EventKind::Outcome;
  return std::nullopt;
}

std::optional<spacetime::Side> parse_side(const std::string& s) {
  if (s == "A") return spacetime::Side::A;
  if (s == "B") return spacetime::Side::B;
  if (s == "Source") return spacetime::Side::Source;
  return std::nullopt;
}

void parse_experiment(Reader& r, const Json& j, ToolConfig& out) {
  const std::string where = "experiment";
  if (!r.object(j, where, {"stations", "events", "settings_count_a", "settings_count_b", "postselection", "inequality"})) {
    return;
  }
  const std::size_t before = r.diagnostics.size();
  std::set<std::string> names;
  const auto st = j.find("stations");
  if (st == j.end() || !st->is_array() || st->empty()) {
    r.fail(where + ".stations", "expected a non-empty array");
  } else {
    for (std::size_t i = 0; i < st->size(); ++i) {
      const std::string at = where + ".stations[" + std::to_string(i) + "]";
      const Json& s = (*st)[i];
      if (!r.object(s, at, {"name", "position_m"})) continue;
      const auto name = r.string(s, "name", at, true);
      Station station;
      const auto pos = s.find("position_m");
      bool ok = pos != s.end() && pos->is_array() && pos->size() == 3;
      if (ok) {
        for (std::size_t k = 0; k < 3; ++k) {
          ok = ok && (*pos)[k].is_number() && std::isfinite((*pos)[k].get<double>());
          if (ok) station.position[k] = (*pos)[k].get<double>();
        }
      }
      if (!ok) r.fail(at + ".position_m", "expected three finite numbers");
      if (!name) continue;
      if (!names.insert(*name).second) r.fail(at + ".name", "duplicate station '" + *name + "'");
      station.name = *name;
      out.stations.push_back(std::move(station));
    }
  }

  spacetime::ExperimentSchedule schedule;
  const auto ev = j.find("events");
  if (ev == j.end() || !ev->is_array() || ev->empty()) {
    r.fail(where + ".events", "expected a non-empty array");
  } else {
    for (std::size_t i = 0; i < ev->size(); ++i) {
      const std::string at = where + ".events[" + std::to_string(i) + "]";
      const Json& e = (*ev)[i];
      if (!r.object(e, at, {"label", "kind", "side", "station", "time_s"})) continue;
      spacetime::Event event;
      const auto label = r.string(e, "label", at, true);
      const auto kind = r.string(e, "kind", at, true);
      const auto side = r.string(e, "side", at, true);
      const auto station = r.string(e, "station", at, true);
      const auto time = r.number(e, "time_s", at, true);
      if (label) event.label = *label;
      if (kind) {
        if (const auto k = parse_kind(*kind)) {
          event.kind = *k;
        } else {
          r.fail(at + ".kind", "expected Emission, SettingChoice or Outcome");
        }
      }
      if (side) {
        if (const auto s = parse_side(*side)) {
          event.side = *s;
        } else {
          r.fail(at + ".side", "expected A, B or Source");
        }
      }
      if (station) {
        const auto found = std::find_if(out.stations.begin(), out.stations.end(),
                                        [&](const Station& s) { return s.name == *station; });
        if (found == out.stations.end()) {
          r.fail(at + ".station", "unknown station '" + *station + "'");
        } else {
          event.position = found->position;
        }
      }
      if (time) event.time = *time;
      schedule.events.push_back(std::move(event));
    }
  }

  const auto count = [&](const char* key) {
    const auto v = r.unsigned_int(j, key, where, true);
    if (v && (*v == 0 || *v > 1'000'000)) r.fail(where + "." + key, "must be between 1 and 1000000");
    return v ? static_cast<int>(std::min<std::uint64_t>(*v, 1'000'000)) : 1;
  };
  schedule.settings_count_a = count("settings_count_a");
  schedule.settings_count_b = count("settings_count_b");
  schedule.postselection = r.boolean(j, "postselection", where).value_or(false);
  if (const auto ineq = r.string(j, "inequality", where, false)) {
    if (*ineq == "chsh") {
      schedule.inequality = spacetime::AnalysisInequality::Chsh;
    } else if (*ineq == "chained") {
      schedule.inequality = spacetime::AnalysisInequality::Chained;
    } else {
      r.fail(where + ".inequality", "expected chsh or chained");
    }
  }
  if (r.diagnostics.size() == before) {
    try {
      schedule.validate();
    } catch (const Error& e) {
      r.fail(where, e.what());
    }
  }
  out.experiment = std::move(schedule);
}

void parse_franson(Reader& r, const Json& j, ToolConfig& out) {
  const std::string where = "franson";
  if (!r.object(j, where,
                {"delta_t_s", "fiber_length_a_m", "fiber_length_b_m", "refractive_index", "visibility",
                 "detector_efficiency", "coincidence_window_s", "n_pairs", "seed", "setting_mode", "phases_a_rad",
                 "phases_a_deg", "phases_a_scan", "phases_b_rad", "phases_b_deg", "phases_b_scan"})) {
    return;
  }
  const std::size_t before = r.diagnostics.size();
  franson::FransonConfig c;
  if (auto v = r.number(j, "delta_t_s", where, false)) c.delta_t = *v;
  if (auto v = r.number(j, "fiber_length_a_m", where, false)) c.fiber_length_a = *v;
  if (auto v = r.number(j, "fiber_length_b_m", where, false)) c.fiber_length_b = *v;
  if (auto v = r.number(j, "refractive_index", where, false)) c.refractive_index = *v;
  if (auto v = r.number(j, "visibility", where, false)) c.visibility = *v;
  if (auto v = r.number(j, "detector_efficiency", where, false)) c.detector_efficiency = *v;
  if (auto v = r.number(j, "coincidence_window_s", where, false)) c.coincidence_window = *v;
  if (auto v = r.unsigned_int(j, "n_pairs", where, true)) {
    c.n_pairs = *v;
    if (*v == 0) r.fail(where + ".n_pairs", "must be positive");
  }
  if (auto v = r.unsigned_int(j, "seed", where, false)) c.seed = *v;
  if (auto mode = r.string(j, "setting_mode", where, false)) {
    if (*mode == "scan") {
      c.setting_mode = franson::SettingMode::Scan;
    } else if (*mode == "random") {
      c.setting_mode = franson::SettingMode::Random;
    } else {
      r.fail(where + ".setting_mode", "expected scan or random");
    }
  }
  if (auto p = r.phases(j, "a", where)) c.phases_a = std::move(*p);
  if (auto p = r.phases(j, "b", where)) c.phases_b = std::move(*p);
  if (r.diagnostics.size() == before) {
    try {
      c.validate();
    } catch (const Error& e) {
      r.fail(where, e.what());
    }
  }
  out.franson = std::move(c);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : ValidationError(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::optional<franson::StationGeometry> ToolConfig::geometry() const {
  if (!experiment) return std::nullopt;
  const spacetime::Event* emission = nullptr;
  const spacetime::Event* out_a = nullptr;
  const spacetime::Event* out_b = nullptr;
  for (const spacetime::Event& e : experiment->events) {
    if (e.kind == spacetime::EventKind::Emission && !emission) emission = &e;
    if (e.kind == spacetime::EventKind::Outcome && e.side == spacetime::Side::A && !out_a) out_a = &e;
    if (e.kind == spacetime::EventKind::Outcome && e.side == spacetime::Side::B && !out_b) out_b = &e;
  }
  if (!emission || !out_a || !out_b) return std::nullopt;
  return franson::StationGeometry{emission->position, out_a->position, out_b->position};
}

ToolConfig parse_config(const Json& document) {
  Reader r;
  ToolConfig out;
  if (r.object(document, "$", {"experiment", "franson", "output"})) {
    if (!document.contains("experiment") && !document.contains("franson")) {
      r.fail("$", "needs an experiment or a franson section");
    }
    if (document.contains("experiment")) parse_experiment(r, document.at("experiment"), out);
    if (document.contains("franson")) parse_franson(r, document.at("franson"), out);
    if (document.contains("output")) {
      const Json& o = document.at("output");
      if (r.object(o, "output", {"csv", "summary", "table"})) {
        out.output.csv = r.string(o, "csv", "output", false).value_or("");
        out.output.summary = r.string(o, "summary", "output", false).value_or("");
        out.output.table = r.string(o, "table", "output", false).value_or("");
      }
    }
  }
  if (!r.diagnostics.empty()) throw ConfigError(std::move(r.diagnostics));
  return out;
}

ToolConfig load_config(const std::filesystem::path& path) {
  Json doc;
  try {
    doc = io::read_json_file(path);
  } catch (const ValidationError& e) {
    throw ConfigError({e.what()});
  }
  return parse_config(doc);
}

}  // namespace bellaudit::config
