#include "bellaudit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>

#include "bellaudit/errors.hpp"

namespace bellaudit::io {

using correlations::CorrelationTable;
using correlations::TableShape;

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json shape_fields(const TableShape& s) {
  return {{"settings_a", s.settings_a}, {"settings_b", s.settings_b}, {"outcomes_a", s.outcomes_a},
          {"outcomes_b", s.outcomes_b}};
}

// Nested [x][y][a][b] array of a flat table-ordered vector.
Json nested(const TableShape& s, std::span<const double> flat) {
  Json out = Json::array();
  for (std::size_t x = 0; x < s.settings_a; ++x) {
    Json jx = Json::array();
    for (std::size_t y = 0; y < s.settings_b; ++y) {
      Json jy = Json::array();
      for (std::size_t a = 0; a < s.outcomes_a; ++a) {
        Json ja = Json::array();
        for (std::size_t b = 0; b < s.outcomes_b; ++b) ja.push_back(flat[s.index(x, y, a, b)]);
        jy.push_back(std::move(ja));
      }
      jx.push_back(std::move(jy));
    }
    out.push_back(std::move(jx));
  }
  return out;
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(where + ": missing field '" + key + "'");
  return *it;
}

std::size_t positive_size(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
    throw ValidationError(where + "." + key + ": expected a positive integer");
  }
  return v.get<std::size_t>();
}

TableShape shape_from_json(const Json& j, const std::string& where) {
  return {positive_size(j, "settings_a", where), positive_size(j, "settings_b", where),
          positive_size(j, "outcomes_a", where), positive_size(j, "outcomes_b", where)};
}

std::vector<std::size_t> responses(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array");
  std::vector<std::size_t> out;
  for (const Json& v : j) {
    if (!v.is_number_unsigned()) throw ValidationError(where + ": expected non-negative integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

Json path_json(const std::vector<franson::PathChoice>& p) {
  Json out = Json::array();
  for (const franson::PathChoice c : p) out.push_back(c == franson::PathChoice::Short ? "S" : "L");
  return out;
}

}  // namespace

Json table_to_json(const CorrelationTable& table) {
  Json j = shape_fields(table.shape());
  j["probs"] = nested(table.shape(), table.probs());
  return j;
}

CorrelationTable table_from_json(const Json& j) {
  const TableShape s = shape_from_json(j, "table");
  const Json& p = field(j, "probs", "table");
  std::vector<double> flat(s.size());
  const auto expect = [](const Json& v, std::size_t n, const std::string& where) {
    if (!v.is_array() || v.size() != n) {
      throw ValidationError(where + ": expected an array of length " + std::to_string(n));
    }
  };
  expect(p, s.settings_a, "table.probs");
  for (std::size_t x = 0; x < s.settings_a; ++x) {
    const std::string wx = "table.probs[" + std::to_string(x) + "]";
    expect(p[x], s.settings_b, wx);
    for (std::size_t y = 0; y < s.settings_b; ++y) {
      const std::string wy = wx + "[" + std::to_string(y) + "]";
      expect(p[x][y], s.outcomes_a, wy);
      for (std::size_t a = 0; a < s.outcomes_a; ++a) {
        const std::string wa = wy + "[" + std::to_string(a) + "]";
        expect(p[x][y][a], s.outcomes_b, wa);
        for (std::size_t b = 0; b < s.outcomes_b; ++b) {
          const Json& v = p[x][y][a][b];
          if (!v.is_number()) throw ValidationError(wa + "[" + std::to_string(b) + "]: expected a number");
          flat[s.index(x, y, a, b)] = v.get<double>();
        }
      }
    }
  }
  return {s, std::move(flat)};
}

Json local_model_to_json(const lhv::LocalModel& model, const TableShape& shape) {
  Json j = {{"type", "local_model"}};
  j.update(shape_fields(shape));
  Json comps = Json::array();
  for (const auto& c : model.components()) {
    comps.push_back({{"weight", c.weight}, {"response_a", c.strategy.response_a}, {"response_b", c.strategy.response_b}});
  }
  j["components"] = std::move(comps);
  return j;
}

lhv::LocalModel local_model_from_json(const Json& j) {
  const Json& type = field(j, "type", "model");
  if (type != "local_model") throw ValidationError("model.type: expected \"local_model\"");
  const TableShape shape = shape_from_json(j, "model");
  const Json& comps = field(j, "components", "model");
  if (!comps.is_array()) throw ValidationError("model.components: expected an array");
  std::vector<lhv::LocalComponent> out;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string where = "model.components[" + std::to_string(i) + "]";
    const Json& w = field(comps[i], "weight", where);
    if (!w.is_number()) throw ValidationError(where + ".weight: expected a number");
    lhv::DeterministicStrategy s{responses(field(comps[i], "response_a", where), where + ".response_a"),
                                 responses(field(comps[i], "response_b", where), where + ".response_b")};
    if (s.response_a.size() != shape.settings_a || s.response_b.size() != shape.settings_b) {
      throw ValidationError(where + ": response length does not match the settings");
    }
    out.push_back({w.get<double>(), std::move(s)});
  }
  return lhv::LocalModel(std::move(out));
}

Json comm_model_to_json(const lhv::CommModel& model, const TableShape& shape) {
  Json j = {{"type", "comm_model"}};
  j.update(shape_fields(shape));
  Json comps = Json::array();
  for (const auto& c : model.components()) {
    comps.push_back({{"weight", c.weight},
                     {"receiver", c.strategy.receiver == lhv::Receiver::A ? "A" : "B"},
                     {"response_a", c.strategy.response_a},
                     {"response_b", c.strategy.response_b}});
  }
  j["components"] = std::move(comps);
  return j;
}

Json certificate_to_json(const lhv::InfeasibilityCertificate& cert, const TableShape& shape) {
  Json j = {{"type", "infeasibility_certificate"}};
  j.update(shape_fields(shape));
  j["coefficients"] = nested(shape, cert.coefficients);
  j["table_value"] = number(cert.table_value);
  j["local_max"] = number(cert.local_max);
  j["normalized"] = cert.normalized;
  j["robustness"] = number(cert.robustness);
  return j;
}

Json expression_to_json(const bell::BellExpression& expr) {
  Json rows = Json::array();
  for (std::size_t x = 0; x < expr.settings_a(); ++x) {
    Json row = Json::array();
    for (std::size_t y = 0; y < expr.settings_b(); ++y) row.push_back(expr.coefficient(x, y));
    rows.push_back(std::move(row));
  }
  return {{"name", expr.name()},
          {"settings_a", expr.settings_a()},
          {"settings_b", expr.settings_b()},
          {"coefficients", std::move(rows)},
          {"declared_local_bound", expr.declared_local_bound()}};
}

Json audit_to_json(const spacetime::AuditReport& report) {
  Json pairs = Json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"first", p.first},
                     {"second", p.second},
                     {"interval", std::string(spacetime::to_string(p.interval))},
                     {"interval_squared_m2", number(p.interval_squared)},
                     {"min_speed_over_c", number(p.min_speed)}});
  }
  Json findings = Json::array();
  for (const auto& f : report.findings) {
    findings.push_back({{"code", std::string(spacetime::finding_code(f.finding))}, {"detail", f.detail}});
  }
  return {{"ok", report.ok()}, {"pairs", std::move(pairs)}, {"findings", std::move(findings)}};
}

Json franson_config_to_json(const franson::FransonConfig& c) {
  return {{"delta_t_s", c.delta_t},
          {"fiber_length_a_m", c.fiber_length_a},
          {"fiber_length_b_m", c.fiber_length_b},
          {"refractive_index", c.refractive_index},
          {"phases_a_rad", c.phases_a},
          {"phases_b_rad", c.phases_b},
          {"visibility", c.visibility},
          {"detector_efficiency", c.detector_efficiency},
          {"coincidence_window_s", c.window()},
          {"n_pairs", c.n_pairs},
          {"seed", c.seed},
          {"setting_mode", c.setting_mode == franson::SettingMode::Scan ? "scan" : "random"}};
}

Json summary_to_json(const franson::RunSummary& s, const franson::FransonConfig& config) {
  Json cells = Json::array();
  for (std::size_t x = 0; x < s.shape.settings_a; ++x) {
    for (std::size_t y = 0; y < s.shape.settings_b; ++y) {
      Json counts = Json::array();
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) counts.push_back(s.kept_counts[s.shape.index(x, y, a, b)]);
      cells.push_back({{"x", x},
                       {"y", y},
                       {"pairs", s.pairs_per_cell[x * s.shape.settings_b + y]},
                       {"kept_counts", std::move(counts)}});
    }
  }
  return {{"seed", s.seed},
          {"n_pairs", s.n_pairs},
          {"both_detected", s.both_detected},
          {"early", s.early},
          {"central", s.central},
          {"late", s.late},
          {"kept", s.kept},
          {"kept_fraction", s.kept_fraction()},
          {"cells", std::move(cells)},
          {"config", franson_config_to_json(config)}};
}

Json postselected_to_json(const franson::PostselectedBound& bound) {
  Json witness = Json::array();
  for (const auto& w : bound.witness) {
    witness.push_back({{"weight", w.weight},
                       {"outcome_a", w.strategy.outcome_a},
                       {"outcome_b", w.strategy.outcome_b},
                       {"path_a", path_json(w.strategy.path_a)},
                       {"path_b", path_json(w.strategy.path_b)}});
  }
  return {{"bound", number(bound.value)},
          {"grid_value", number(bound.grid_value)},
          {"distinct_strategies", bound.distinct_strategies},
          {"witness", std::move(witness)}};
}

Json switching_to_json(const franson::SwitchingRequirement& req) {
  Json constraints = Json::array();
  for (const auto& k : req.constraints) {
    constraints.push_back({{"name", k.name}, {"window_s", number(k.window)}, {"rate_hz", number(k.rate_hz)}});
  }
  return {{"min_rate_hz", number(req.min_rate_hz)},
          {"binding", req.binding},
          {"feasible", req.feasible},
          {"constraints", std::move(constraints)}};
}

std::string fringe_csv(const franson::FringeScan& scan) {
  std::string out = "phase_a_rad,n_kept,n_equal,n_unequal,e_hat\n";
  char line[160];
  for (const auto& p : scan.points) {
    std::snprintf(line, sizeof line, "%.17g,%llu,%llu,%llu,%.17g\n", p.phase_a, static_cast<unsigned long long>(p.n_kept),
                  static_cast<unsigned long long>(p.n_equal), static_cast<unsigned long long>(p.n_unequal), p.e_hat);
    out += line;
  }
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError(path.string() + ": cannot write");
  out << text;
  if (!out) throw ValidationError(path.string() + ": write failed");
}

}  // namespace bellaudit::io
