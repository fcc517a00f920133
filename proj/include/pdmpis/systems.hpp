#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdmpis/model.hpp"
#include "pdmpis/structure.hpp"

namespace pdmpis {

// ------------------------------------------------------- grace-period model

/// Components with status 0 (broken) or 1 (working). Position is
/// (X1 cumulative time in the failure modes, X2 current sojourn in them,
/// X3 elapsed time); the path fails when X1 reaches the global grace or X2
/// the local grace.
struct GracePeriodConfig {
  std::string name = "grace";
  std::size_t components = 0;
  SpDiagram diagram = SpDiagram::component(0);
  std::vector<double> failure_rates;
  std::vector<double> repair_rates;
  double t_max = 1500.0;
  double global_grace = 75.0;
  double local_grace = 50.0;
  std::optional<std::vector<std::int8_t>> initial_mode;
};

class GracePeriodModel : public SystemModel {
 public:
  explicit GracePeriodModel(const GracePeriodConfig& config);

  const GracePeriodConfig& config() const noexcept { return config_; }

  SystemState initial_state() const override;
  SystemState flow(const SystemState& z, double h) const override;
  double boundary_time(const SystemState& z) const override;
  void after_jump(SystemState& post) const override;
  void validate(const SystemState& z) const override;

 private:
  GracePeriodConfig config_;
};

/// Table-driven series/parallel systems of `rates.size()` components.
GracePeriodConfig series_config(std::vector<double> failure_rates, std::vector<double> repair_rates);
GracePeriodConfig parallel_config(std::vector<double> failure_rates,
                                  std::vector<double> repair_rates);
std::unique_ptr<GracePeriodModel> build_series(const GracePeriodConfig& config);
std::unique_ptr<GracePeriodModel> build_parallel(const GracePeriodConfig& config);

// ---------------------------------------------------------- spent fuel pool

enum class LevelRateFormula {
  /// r / (rho C A l), as printed.
  as_printed,
  /// r / (rho A l): evaporated mass per hour over water density and area.
  latent_heat,
};

struct SfpConstants {
  double residual_power = 2.106e10;  // J/h
  double heat_capacity = 4180.0;     // J/(kg K)
  double density = 990.0;            // kg/m^3
  double area = 77.0;                // m^2
  double source_temperature = 15.0;  // deg C
  double flow_rate = 550.0;          // m^3/h
  double latent_heat = 2.257e6;      // J/kg
  double t_max = 3600.0;             // h
  double initial_level = 19.0;       // m
  double critical_level = 16.0;      // m
  double initial_temperature = 15.0; // deg C
  double boiling_temperature = 100.0;
};

/// Status -1 broken, 0 inactive, 1 active. Position is (temperature, level,
/// elapsed time); rates are affine in temperature.
struct SfpConfig {
  std::string name = "sfp";
  SfpConstants constants;
  LevelRateFormula level_rate_formula = LevelRateFormula::as_printed;
  std::size_t components = 0;
  SpDiagram diagram = SpDiagram::component(0);
  RateTable rates;
};

class SfpModel : public SystemModel {
 public:
  explicit SfpModel(const SfpConfig& config);

  const SfpConfig& config() const noexcept { return config_; }

  /// Equilibrium temperature of the cooled pool.
  double cooled_equilibrium() const noexcept;
  /// Heating rate (deg C/h) without cooling at the given level.
  double heating_rate(double level) const noexcept;
  /// Level drop rate (m/h) while boiling.
  double level_rate() const noexcept;
  /// Hours until the temperature reaches boiling, +inf if it never does.
  double time_to_boiling(const SystemState& z) const;

  SystemState initial_state() const override;
  SystemState flow(const SystemState& z, double h) const override;
  double boundary_time(const SystemState& z) const override;
  void reconfigure(std::vector<std::int8_t>& mode) const override;
  double covariate(const SystemState& z) const override;
  double covariate_integral(const SystemState& z, double h) const override;
  void validate(const SystemState& z) const override;

 private:
  SfpConfig config_;
};

/// Fig.-style pool layout: 15 components G0, G1..G3, S1, S2, L_{i,j}.
SpDiagram sfp_diagram();
std::vector<std::string> sfp_component_names();

std::unique_ptr<SfpModel> build_sfp(const SfpConfig& config);

/// Lowest-index intact MPS active, other non-broken components inactive.
std::vector<std::int8_t> sfp_reconfigure(const std::vector<std::int8_t>& mode,
                                         const CutPathDecomposition& decomp);

}  // namespace pdmpis
