#include <algorithm>
#include <cmath>

#include "pdmpis/error.hpp"
#include "pdmpis/numeric.hpp"
#include "pdmpis/systems.hpp"

namespace pdmpis {

namespace {

constexpr std::size_t kTemp = 0;
constexpr std::size_t kLevel = 1;
constexpr std::size_t kTime = 2;

SystemModel::Common sfp_common(const SfpConfig& c) {
  const SfpConstants& k = c.constants;
  for (double v : {k.residual_power, k.heat_capacity, k.density, k.area, k.flow_rate,
                   k.latent_heat, k.t_max, k.initial_level, k.critical_level}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::model_definition, "pool constants must be positive and finite");
    }
  }
  if (k.critical_level >= k.initial_level) {
    throw Error(ErrorKind::model_definition, "critical level must lie below the initial level");
  }
  if (k.initial_temperature < k.source_temperature ||
      k.initial_temperature > k.boiling_temperature) {
    throw Error(ErrorKind::model_definition, "initial temperature outside [source, boiling]");
  }
  SystemModel::Common common;
  common.name = c.name;
  common.alphabet = {-1, 0, 1};
  common.broken_status = -1;
  common.repaired_status = 0;
  common.horizon = k.t_max;
  common.time_coordinate = kTime;
  common.position_size = 3;
  return common;
}

void check_rates(const SfpConfig& c) {
  const double lo = c.constants.source_temperature;
  const double hi = c.constants.boiling_temperature;
  for (std::size_t j = 0; j < c.components; ++j) {
    for (std::int8_t s : {-1, 0, 1}) {
      const AffineRate& r = c.rates.at(j, s);
      if (r.at(lo) < 0.0 || r.at(hi) < 0.0) {
        throw Error(ErrorKind::model_definition,
                    "rate of component " + std::to_string(j) + " negative on the temperature range");
      }
    }
  }
}

}  // namespace

SfpModel::SfpModel(const SfpConfig& config)
    : SystemModel(sfp_common(config), StructureFunction(config.components, config.diagram),
                  config.rates),
      config_(config) {
  check_rates(config_);
}

double SfpModel::cooled_equilibrium() const noexcept {
  const SfpConstants& k = config_.constants;
  return k.source_temperature + k.residual_power / (k.density * k.heat_capacity * k.flow_rate);
}

double SfpModel::heating_rate(double level) const noexcept {
  const SfpConstants& k = config_.constants;
  return k.residual_power / (k.density * k.heat_capacity * k.area * level);
}

double SfpModel::level_rate() const noexcept {
  const SfpConstants& k = config_.constants;
  const double denom = config_.level_rate_formula == LevelRateFormula::as_printed
                           ? k.density * k.heat_capacity * k.area * k.latent_heat
                           : k.density * k.area * k.latent_heat;
  return k.residual_power / denom;
}

double SfpModel::time_to_boiling(const SystemState& z) const {
  if (!in_failure_modes(z.mode)) return kInf;
  const double boil = config_.constants.boiling_temperature;
  const double t = z.position[kTemp];
  if (t >= boil) return 0.0;
  return (boil - t) / heating_rate(z.position[kLevel]);
}

SystemState SfpModel::initial_state() const {
  SystemState z;
  z.position = {config_.constants.initial_temperature, config_.constants.initial_level, 0.0};
  z.mode.assign(component_count(), 0);
  reconfigure(z.mode);
  return z;
}

SystemState SfpModel::flow(const SystemState& z, double h) const {
  SystemState out = z;
  const SfpConstants& k = config_.constants;
  const double temp = z.position[kTemp];
  const double level = z.position[kLevel];
  if (!in_failure_modes(z.mode)) {
    // Cooled: exponential approach to the equilibrium, level unchanged.
    const double rate = k.flow_rate / (k.area * level);
    const double eq = cooled_equilibrium();
    out.position[kTemp] = eq + (temp - eq) * std::exp(-rate * h);
  } else {
    const double h100 = time_to_boiling(z);
    if (h < h100) {
      out.position[kTemp] = temp + heating_rate(level) * h;
    } else {
      out.position[kTemp] = k.boiling_temperature;
      out.position[kLevel] = level - level_rate() * (h - h100);
    }
  }
  out.position[kTime] += h;
  return out;
}

double SfpModel::boundary_time(const SystemState& z) const {
  if (!in_failure_modes(z.mode)) return kInf;
  const double left = z.position[kLevel] - config_.constants.critical_level;
  return time_to_boiling(z) + std::max(0.0, left) / level_rate();
}

void SfpModel::reconfigure(std::vector<std::int8_t>& mode) const {
  mode = sfp_reconfigure(mode, decomposition());
}

double SfpModel::covariate(const SystemState& z) const { return z.position[kTemp]; }

double SfpModel::covariate_integral(const SystemState& z, double h) const {
  const SfpConstants& k = config_.constants;
  const double temp = z.position[kTemp];
  const double level = z.position[kLevel];
  if (!in_failure_modes(z.mode)) {
    const double rate = k.flow_rate / (k.area * level);
    const double eq = cooled_equilibrium();
    return eq * h - (temp - eq) * std::expm1(-rate * h) / rate;
  }
  const double h100 = time_to_boiling(z);
  const double a = temp < k.boiling_temperature ? heating_rate(level) : 0.0;
  if (h <= h100) return temp * h + 0.5 * a * h * h;
  return temp * h100 + 0.5 * a * h100 * h100 + k.boiling_temperature * (h - h100);
}

void SfpModel::validate(const SystemState& z) const {
  SystemModel::validate(z);
  const SfpConstants& k = config_.constants;
  const double tol = 1e-9;
  if (z.position[kTemp] < k.source_temperature - tol ||
      z.position[kTemp] > k.boiling_temperature + tol) {
    throw Error(ErrorKind::invalid_state, "temperature outside [source, boiling]");
  }
  if (z.position[kLevel] < k.critical_level - tol || z.position[kLevel] > k.initial_level + tol) {
    throw Error(ErrorKind::invalid_state, "level outside [critical, initial]");
  }
}

SpDiagram sfp_diagram() {
  using D = SpDiagram;
  auto c = [](std::size_t id) { return D::component(id); };
  // 0 G0, 1-3 G1..G3, 4 S1, 5 S2, 6-8 L_{1..3,1}, 9-11 L_{1..3,2}, 12-14 L_{1..3,3}
  std::vector<D> lines;
  for (std::size_t j = 0; j < 3; ++j) {
    D source = j < 2 ? c(4) : D::parallel({c(4), c(5)});
    lines.push_back(D::series({D::parallel({c(0), c(1 + j)}), source, c(6 + 3 * j), c(7 + 3 * j),
                               c(8 + 3 * j)}));
  }
  return D::parallel(std::move(lines));
}

std::vector<std::string> sfp_component_names() {
  return {"G0",  "G1",  "G2",  "G3",  "S1",  "S2",  "L11", "L21",
          "L31", "L12", "L22", "L32", "L13", "L23", "L33"};
}

std::unique_ptr<SfpModel> build_sfp(const SfpConfig& config) {
  return std::make_unique<SfpModel>(config);
}

std::vector<std::int8_t> sfp_reconfigure(const std::vector<std::int8_t>& mode,
                                         const CutPathDecomposition& decomp) {
  std::vector<std::int8_t> out = mode;
  ComponentMask broken = 0;
  for (std::size_t j = 0; j < mode.size(); ++j) {
    if (mode[j] == -1) broken |= ComponentMask{1} << j;
  }
  ComponentMask active = 0;
  for (ComponentMask path : decomp.mps_masks) {
    if ((path & broken) == 0) {
      active = path;
      break;
    }
  }
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (out[j] != -1) out[j] = (active >> j) & 1u ? 1 : 0;
  }
  return out;
}

}  // namespace pdmpis
