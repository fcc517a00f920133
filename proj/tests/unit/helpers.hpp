#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdmpis/config.hpp"
#include "pdmpis/systems.hpp"

namespace testutil {

inline std::string model_path(const std::string& name) {
  return std::string(PDMPIS_MODELS_DIR) + "/" + name + ".json";
}

inline pdmpis::LoadedModel load(const std::string& name) {
  return pdmpis::load_model(model_path(name));
}

/// Single component, failure rate `fail` while working, `repair` while broken.
inline std::unique_ptr<pdmpis::GracePeriodModel> one_component(double fail, double repair,
                                                                double t_max, double grace,
                                                                bool start_broken = false) {
  auto c = pdmpis::series_config({fail}, {repair});
  c.name = "one";
  c.t_max = t_max;
  c.global_grace = grace;
  c.local_grace = grace;
  if (start_broken) c.initial_mode = std::vector<std::int8_t>{0};
  return pdmpis::build_series(c);
}

inline std::unique_ptr<pdmpis::GracePeriodModel> series(std::vector<double> fail,
                                                        std::vector<double> repair,
                                                        double t_max = 1500.0,
                                                        double global = 75.0,
                                                        double local = 50.0) {
  auto c = pdmpis::series_config(std::move(fail), std::move(repair));
  c.t_max = t_max;
  c.global_grace = global;
  c.local_grace = local;
  return pdmpis::build_series(c);
}

inline std::unique_ptr<pdmpis::GracePeriodModel> parallel(std::vector<double> fail,
                                                          std::vector<double> repair,
                                                          double t_max = 1500.0,
                                                          double global = 75.0,
                                                          double local = 50.0) {
  auto c = pdmpis::parallel_config(std::move(fail), std::move(repair));
  c.t_max = t_max;
  c.global_grace = global;
  c.local_grace = local;
  return pdmpis::build_parallel(c);
}

inline const pdmpis::SfpModel& as_sfp(const pdmpis::LoadedModel& m) {
  return dynamic_cast<const pdmpis::SfpModel&>(*m.model);
}

inline bool rel_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace testutil
