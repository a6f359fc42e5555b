#include "bellaudit/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <optional>
#include <ostream>

#include "bellaudit/bell.hpp"
#include "bellaudit/config.hpp"
#include "bellaudit/errors.hpp"
#include "bellaudit/franson.hpp"
#include "bellaudit/io.hpp"
#include "bellaudit/lhv.hpp"

namespace bellaudit::cli {

namespace {

using io::Json;

// Positive integer from the environment, or `fallback` when unset.
std::uint64_t env_count(const char* name, std::uint64_t fallback) {
  const char* raw = std::getenv(name);
  if (raw == nullptr || *raw == '\0') return fallback;
  const std::string_view s(raw);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || v == 0) {
    throw config::ConfigError({std::string(name) + ": expected a positive integer, got '" + raw + "'"});
  }
  return v;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    io::write_text_file(path, text);
  }
}

struct AuditArgs {
  std::string config;
  std::string out;
};

int cmd_audit(const AuditArgs& args, std::ostream& out) {
  const config::ToolConfig cfg = config::load_config(args.config);
  if (!cfg.experiment) throw config::ConfigError({"experiment: missing"});
  const spacetime::AuditReport report = spacetime::audit_experiment(*cfg.experiment);
  Json j = io::audit_to_json(report);
  j["settings_count_a"] = cfg.experiment->settings_count_a;
  j["settings_count_b"] = cfg.experiment->settings_count_b;
  if (cfg.franson) {
    if (const auto geometry = cfg.geometry()) {
      j["switching"] = io::switching_to_json(franson::required_switching_rate(*cfg.franson, *geometry));
    }
  }
  emit(io::dump(j), args.out, out);
  return report.ok() ? kExitOk : kExitFindings;
}

struct SimulateArgs {
  std::string config;
  std::string csv;
  std::string summary;
  std::string table;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> pairs;
  std::optional<unsigned> workers;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  const config::ToolConfig cfg = config::load_config(args.config);
  if (!cfg.franson) throw config::ConfigError({"franson: missing"});
  franson::FransonConfig fc = *cfg.franson;
  if (args.seed) fc.seed = *args.seed;
  if (args.pairs) fc.n_pairs = *args.pairs;
  const unsigned workers = args.workers ? *args.workers : static_cast<unsigned>(env_count("BELLAUDIT_WORKERS", 1));

  const std::string csv = args.csv.empty() ? cfg.output.csv : args.csv;
  const std::string summary_path = args.summary.empty() ? cfg.output.summary : args.summary;
  const std::string table_path = args.table.empty() ? cfg.output.table : args.table;

  franson::RunSummary summary;
  if (fc.phases_b.size() == 1) {
    const franson::FringeScan scan = franson::scan_fringe(fc, workers);
    if (!csv.empty()) io::write_text_file(csv, io::fringe_csv(scan));
    summary = scan.summary;
  } else {
    if (!csv.empty()) throw config::ConfigError({"--csv: a fringe needs a single phases_b entry"});
    summary = franson::simulate_run(fc, workers);
  }
  if (!table_path.empty()) {
    // Raw frequencies signal at the statistical-noise level; with one fixed
    // side the no-signaling estimate is the table a local fit can reproduce.
    const bool fixed_side = summary.shape.settings_a == 1 || summary.shape.settings_b == 1;
    const auto estimator = fixed_side ? franson::TableEstimator::NoSignalingMle : franson::TableEstimator::Raw;
    Json t = io::table_to_json(franson::empirical_table(summary, estimator));
    t["estimator"] = fixed_side ? "no_signaling_mle" : "raw";
    io::write_text_file(table_path, io::dump(t));
  }
  emit(io::dump(io::summary_to_json(summary, fc)), summary_path, out);
  return kExitOk;
}

struct BoundsArgs {
  bool chsh = false;
  std::optional<std::size_t> chained;
  std::string postselected;
  std::size_t budget = 4;
  std::uint64_t seed = 0;
  std::optional<std::size_t> cap;
  std::optional<std::size_t> strategy_cap;
  std::string out;
};

int cmd_bounds(const BoundsArgs& args, std::ostream& out) {
  if (args.chsh == args.chained.has_value()) throw config::ConfigError({"bounds: give exactly one of --chsh, --chained"});
  const std::size_t cap = args.cap ? *args.cap : env_count("BELLAUDIT_ENUM_CAP", lhv::kDefaultEnumerationCap);
  const std::size_t n = args.chsh ? 2 : *args.chained;
  if (n < 2) throw config::ConfigError({"--chained: n must be at least 2"});
  const bell::BellExpression expr = args.chsh ? bell::chsh() : bell::chained_expression(n);

  const bell::LocalBound local = bell::local_bound_by_enumeration(expr, cap);
  const double quantum = bell::quantum_chained_value(n);
  Json j = {{"expression", io::expression_to_json(expr)},
            {"local", local.value},
            {"local_witness", {{"response_a", local.witness.response_a}, {"response_b", local.witness.response_b}}},
            {"quantum", quantum},
            {"critical_visibility", local.value / quantum}};

  if (!args.postselected.empty()) {
    franson::StrategyClass cls;
    if (args.postselected == "setting-dependent") {
      cls = franson::StrategyClass::SettingDependentPath;
    } else if (args.postselected == "fixed-path") {
      cls = franson::StrategyClass::FixedPath;
    } else {
      throw config::ConfigError({"--postselected: expected setting-dependent or fixed-path"});
    }
    franson::PostselectedSearchOptions opts;
    opts.max_strategies = args.strategy_cap ? *args.strategy_cap : env_count("BELLAUDIT_STRATEGY_CAP", opts.max_strategies);
    opts.seed = args.seed;
    const franson::PostselectedBound ps = franson::search_postselected_bound(expr, cls, args.budget, opts);
    Json p = io::postselected_to_json(ps);
    p["class"] = args.postselected;
    p["budget"] = args.budget;
    p["seed"] = args.seed;
    // Visibility a postselected experiment would need; above 1 means none.
    p["critical_visibility"] = ps.value / quantum;
    j["postselected"] = std::move(p);
  }
  emit(io::dump(j), args.out, out);
  return kExitOk;
}

struct FitArgs {
  std::string table;
  std::string out;
  std::optional<std::size_t> cap;
};

int cmd_lhv_fit(const FitArgs& args, std::ostream& out) {
  correlations::CorrelationTable table = [&] {
    try {
      return io::table_from_json(io::read_json_file(args.table));
    } catch (const ValidationError& e) {
      throw config::ConfigError({e.what()});
    }
  }();
  const std::size_t cap = args.cap ? *args.cap : env_count("BELLAUDIT_ENUM_CAP", lhv::kDefaultEnumerationCap);
  const auto& shape = table.shape();

  std::optional<lhv::LocalModel> model;
  std::string method;
  if (shape.settings_a == 1 || shape.settings_b == 1) {
    try {
      model = lhv::build_single_setting_model(table);
      method = "single_setting";
    } catch (const NotApplicable&) {
      // Signaling single-setting tables fall through to the LP.
    }
  }
  if (!model) {
    lhv::MembershipResult r = lhv::local_polytope_membership(table, cap);
    if (auto* cert = std::get_if<lhv::InfeasibilityCertificate>(&r)) {
      Json j = io::certificate_to_json(*cert, shape);
      j["method"] = "local_polytope_lp";
      emit(io::dump(j), args.out, out);
      return kExitOk;
    }
    model = std::get<lhv::LocalModel>(std::move(r));
    method = "local_polytope_lp";
  }
  Json j = io::local_model_to_json(*model, shape);
  j["method"] = method;
  j["max_reprediction_error"] = correlations::max_abs_difference(lhv::predict(*model, shape), table);
  emit(io::dump(j), args.out, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bell-test audit toolkit", "bellaudit"};
  app.require_subcommand(1);

  AuditArgs audit;
  CLI::App* audit_cmd = app.add_subcommand("audit", "Causality audit of an experiment schedule");
  audit_cmd->add_option("config", audit.config, "Config file")->required();
  audit_cmd->add_option("--out", audit.out, "Report path (default stdout)");

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Franson Monte Carlo run");
  sim_cmd->add_option("config", sim.config, "Config file")->required();
  sim_cmd->add_option("--csv", sim.csv, "Fringe CSV path");
  sim_cmd->add_option("--summary", sim.summary, "Summary JSON path (default stdout)");
  sim_cmd->add_option("--table", sim.table, "Empirical table JSON path");
  sim_cmd->add_option("--seed", sim.seed, "Override the config seed");
  sim_cmd->add_option("--pairs", sim.pairs, "Override n_pairs")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--workers", sim.workers, "Worker threads (env BELLAUDIT_WORKERS)")->check(CLI::PositiveNumber);

  BoundsArgs bounds;
  CLI::App* bounds_cmd = app.add_subcommand("bounds", "Local, quantum and postselected bounds");
  bounds_cmd->add_flag("--chsh", bounds.chsh, "CHSH expression");
  bounds_cmd->add_option("--chained", bounds.chained, "Chained expression with N settings per side");
  bounds_cmd->add_option("--postselected", bounds.postselected, "setting-dependent | fixed-path");
  bounds_cmd->add_option("--budget", bounds.budget, "Refinement restarts");
  bounds_cmd->add_option("--seed", bounds.seed, "Refinement seed");
  bounds_cmd->add_option("--cap", bounds.cap, "Enumeration cap (env BELLAUDIT_ENUM_CAP)")->check(CLI::PositiveNumber);
  bounds_cmd->add_option("--strategy-cap", bounds.strategy_cap, "Postselected strategy cap (env BELLAUDIT_STRATEGY_CAP)")
      ->check(CLI::PositiveNumber);
  bounds_cmd->add_option("--out", bounds.out, "Report path (default stdout)");

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("lhv-fit", "Local model or infeasibility certificate for a table");
  fit_cmd->add_option("--table", fit.table, "Table JSON")->required();
  fit_cmd->add_option("--out", fit.out, "Output path (default stdout)");
  fit_cmd->add_option("--cap", fit.cap, "Enumeration cap (env BELLAUDIT_ENUM_CAP)")->check(CLI::PositiveNumber);

  std::vector<std::string> storage(args);
  std::vector<char*> argv;
  for (std::string& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    if (*audit_cmd) return cmd_audit(audit, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*bounds_cmd) return cmd_bounds(bounds, out);
    if (*fit_cmd) return cmd_lhv_fit(fit, out);
  } catch (const config::ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitCapExceeded;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace bellaudit::cli
