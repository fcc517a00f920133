#include <algorithm>
#include <cmath>

#include "pdmpis/error.hpp"
#include "pdmpis/numeric.hpp"
#include "pdmpis/systems.hpp"

namespace pdmpis {

namespace {

RateTable grace_rates(const GracePeriodConfig& c) {
  if (c.failure_rates.size() != c.components || c.repair_rates.size() != c.components) {
    throw Error(ErrorKind::model_definition, "one failure and one repair rate per component");
  }
  RateTable t(c.components, {0, 1});
  for (std::size_t j = 0; j < c.components; ++j) {
    if (!(c.failure_rates[j] >= 0.0) || !(c.repair_rates[j] >= 0.0)) {
      throw Error(ErrorKind::model_definition, "rates must be nonnegative");
    }
    t.at(j, 0) = {c.repair_rates[j], 0.0};
    t.at(j, 1) = {c.failure_rates[j], 0.0};
  }
  return t;
}

SystemModel::Common grace_common(const GracePeriodConfig& c) {
  if (!(c.t_max > 0.0) || !(c.global_grace >= 0.0) || !(c.local_grace >= 0.0) ||
      c.global_grace > c.t_max || c.local_grace > c.t_max) {
    throw Error(ErrorKind::model_definition, "grace periods must lie in [0, t_max]");
  }
  SystemModel::Common common;
  common.name = c.name;
  common.alphabet = {0, 1};
  common.broken_status = 0;
  common.repaired_status = 1;
  common.horizon = c.t_max;
  common.time_coordinate = 2;
  common.position_size = 3;
  return common;
}

std::vector<SpDiagram> leaves(std::size_t d) {
  std::vector<SpDiagram> out;
  for (std::size_t j = 0; j < d; ++j) out.push_back(SpDiagram::component(j));
  return out;
}

}  // namespace

GracePeriodModel::GracePeriodModel(const GracePeriodConfig& config)
    : SystemModel(grace_common(config), StructureFunction(config.components, config.diagram),
                  grace_rates(config)),
      config_(config) {
  if (config_.initial_mode) validate(initial_state());
}

SystemState GracePeriodModel::initial_state() const {
  SystemState z;
  z.position = {0.0, 0.0, 0.0};
  z.mode = config_.initial_mode.value_or(std::vector<std::int8_t>(component_count(), 1));
  return z;
}

SystemState GracePeriodModel::flow(const SystemState& z, double h) const {
  SystemState out = z;
  if (in_failure_modes(z.mode)) {
    out.position[0] += h;
    out.position[1] += h;
  } else {
    out.position[1] = 0.0;
  }
  out.position[2] += h;
  return out;
}

double GracePeriodModel::boundary_time(const SystemState& z) const {
  if (!in_failure_modes(z.mode)) return kInf;
  const double global_left = config_.global_grace - z.position[0];
  const double local_left = config_.local_grace - z.position[1];
  return std::max(0.0, std::min(global_left, local_left));
}

void GracePeriodModel::after_jump(SystemState& post) const {
  if (!in_failure_modes(post.mode)) post.position[1] = 0.0;
}

void GracePeriodModel::validate(const SystemState& z) const {
  SystemModel::validate(z);
  const double tol = 1e-9;
  if (z.position[0] < 0.0 || z.position[0] > config_.global_grace + tol ||
      z.position[1] < 0.0 || z.position[1] > config_.local_grace + tol ||
      z.position[1] > z.position[0] + tol) {
    throw Error(ErrorKind::invalid_state, "grace clocks outside their range");
  }
}

GracePeriodConfig series_config(std::vector<double> failure_rates, std::vector<double> repair_rates) {
  GracePeriodConfig c;
  c.name = "series" + std::to_string(failure_rates.size());
  c.components = failure_rates.size();
  c.diagram = SpDiagram::series(leaves(c.components));
  c.failure_rates = std::move(failure_rates);
  c.repair_rates = std::move(repair_rates);
  return c;
}

GracePeriodConfig parallel_config(std::vector<double> failure_rates,
                                  std::vector<double> repair_rates) {
  GracePeriodConfig c;
  c.name = "parallel" + std::to_string(failure_rates.size());
  c.components = failure_rates.size();
  c.diagram = SpDiagram::parallel(leaves(c.components));
  c.failure_rates = std::move(failure_rates);
  c.repair_rates = std::move(repair_rates);
  return c;
}

std::unique_ptr<GracePeriodModel> build_series(const GracePeriodConfig& config) {
  GracePeriodConfig c = config;
  c.diagram = SpDiagram::series(leaves(c.components));
  return std::make_unique<GracePeriodModel>(c);
}

std::unique_ptr<GracePeriodModel> build_parallel(const GracePeriodConfig& config) {
  GracePeriodConfig c = config;
  c.diagram = SpDiagram::parallel(leaves(c.components));
  return std::make_unique<GracePeriodModel>(c);
}

}  // namespace pdmpis
