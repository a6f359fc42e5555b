#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bellaudit/errors.hpp"
#include "bellaudit/franson.hpp"
#include "bellaudit/io.hpp"
#include "bellaudit/spacetime.hpp"

namespace bellaudit::config {

// Schema violations, one "path: message" line each.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

struct Station {
  std::string name;
  spacetime::Vec3 position{0.0, 0.0, 0.0};
};

struct OutputPaths {
  std::string csv;
  std::string summary;
  std::string table;
};

struct ToolConfig {
  std::vector<Station> stations;
  std::optional<spacetime::ExperimentSchedule> experiment;
  std::optional<franson::FransonConfig> franson;
  OutputPaths output;

  // Source = Emission position, stations = positions of the first Outcome
  // on each side. Empty when the schedule lacks one of them.
  std::optional<franson::StationGeometry> geometry() const;
};

// Validates the whole document before returning; throws ConfigError listing
// every problem found.
ToolConfig parse_config(const io::Json& document);
ToolConfig load_config(const std::filesystem::path& path);

}  // namespace bellaudit::config
