#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdmpis/importance.hpp"
#include "pdmpis/model.hpp"

namespace pdmpis {

inline constexpr int kModelSchemaVersion = 1;

/// Per-model run defaults carried by the config file.
struct ModelDefaults {
  std::map<Family, std::size_t> packet_size;
  std::optional<double> init_t;
  double init_p = 1.0 / 3.0;
  std::optional<double> theta_hi;

  std::size_t packet_size_for(Family f) const;
};

struct LoadedModel {
  std::unique_ptr<SystemModel> model;
  ModelDefaults defaults;
  std::vector<std::string> component_names;
};

/// Parses a model description (see docs/model_config.md). Throws a config
/// error on malformed input.
LoadedModel parse_model(std::string_view json_text);
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace pdmpis
