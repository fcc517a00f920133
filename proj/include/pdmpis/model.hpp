#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdmpis/state.hpp"
#include "pdmpis/structure.hpp"

namespace pdmpis {

/// Rate of the form intercept + slope * s, where s is the model covariate.
struct AffineRate {
  double intercept = 0.0;
  double slope = 0.0;

  double at(double s) const noexcept { return intercept + slope * s; }
  bool operator==(const AffineRate&) const = default;
};

/// Per-component, per-status affine rates.
class RateTable {
 public:
  RateTable() = default;
  RateTable(std::size_t components, std::vector<std::int8_t> alphabet);

  std::size_t component_count() const noexcept { return d_; }
  const std::vector<std::int8_t>& alphabet() const noexcept { return alphabet_; }

  AffineRate& at(std::size_t component, std::int8_t status);
  const AffineRate& at(std::size_t component, std::int8_t status) const;

  /// Copy with one entry multiplied by `factor` (intercept and slope).
  RateTable scaled(std::size_t component, std::int8_t status, double factor) const;

 private:
  std::size_t index(std::size_t component, std::int8_t status) const;

  std::size_t d_ = 0;
  std::vector<std::int8_t> alphabet_;
  std::int8_t min_status_ = 0;
  std::size_t width_ = 0;
  std::vector<AffineRate> data_;
};

struct CovariateRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// A PDMP whose jumps toggle one component between broken and not broken,
/// followed by a deterministic reconfiguration that never changes which
/// components are broken. Rates are affine in one scalar covariate of the
/// position (temperature for the pool, nothing for series/parallel).
class SystemModel {
 public:
  struct Common {
    std::string name;
    std::vector<std::int8_t> alphabet;
    std::int8_t broken_status = 0;
    std::int8_t repaired_status = 1;
    double horizon = 0.0;
    std::size_t time_coordinate = 0;
    std::size_t position_size = 0;
  };

  SystemModel(Common common, StructureFunction structure, RateTable nominal);
  virtual ~SystemModel() = default;

  SystemModel(const SystemModel&) = delete;
  SystemModel& operator=(const SystemModel&) = delete;

  const std::string& name() const noexcept { return common_.name; }
  std::size_t component_count() const noexcept { return structure_.component_count(); }
  const std::vector<std::int8_t>& status_alphabet() const noexcept { return common_.alphabet; }
  std::int8_t broken_status() const noexcept { return common_.broken_status; }
  bool is_broken(std::int8_t status) const noexcept { return status == common_.broken_status; }
  /// Status a component takes when toggled (before reconfiguration).
  std::int8_t toggled(std::int8_t status) const noexcept {
    return is_broken(status) ? common_.repaired_status : common_.broken_status;
  }
  double horizon() const noexcept { return common_.horizon; }
  std::size_t time_coordinate() const noexcept { return common_.time_coordinate; }
  std::size_t position_size() const noexcept { return common_.position_size; }

  const StructureFunction& structure() const noexcept { return structure_; }
  const CutPathDecomposition& decomposition() const noexcept { return decomposition_; }
  const RateTable& nominal_rates() const noexcept { return nominal_; }

  virtual SystemState initial_state() const = 0;

  /// Flow image after h >= 0 hours; mode unchanged. No argument checks.
  virtual SystemState flow(const SystemState& z, double h) const = 0;

  /// Time until the flow from z reaches the boundary, +inf if never.
  virtual double boundary_time(const SystemState& z) const = 0;

  /// Post-boundary state; nullopt means the boundary is absorbing (the path
  /// has entered the failure region).
  virtual std::optional<SystemState> boundary_jump(const SystemState& at) const;

  /// Applies the deterministic reconfiguration after a status change.
  virtual void reconfigure(std::vector<std::int8_t>& mode) const;

  /// Position adjustments tied to a mode change (e.g. clock resets).
  virtual void after_jump(SystemState& post) const;

  virtual double covariate(const SystemState& z) const;
  /// Integral of the covariate along the flow over [0, h].
  virtual double covariate_integral(const SystemState& z, double h) const;
  /// Range of the covariate along the flow over [0, h]; the default assumes
  /// a monotone path and returns the endpoint values.
  virtual CovariateRange covariate_range(const SystemState& z, double h) const;

  /// Throws invalid-state when z is outside the state space.
  virtual void validate(const SystemState& z) const;

  ComponentMask broken_mask(std::span<const std::int8_t> mode) const noexcept;
  bool in_failure_modes(std::span<const std::int8_t> mode) const;
  SystemState jump_target(const SystemState& pre, std::size_t component) const;
  double elapsed(const SystemState& z) const { return z.position[common_.time_coordinate]; }

 private:
  Common common_;
  StructureFunction structure_;
  CutPathDecomposition decomposition_;
  RateTable nominal_;
};

/// Checked flow: h >= 0 and a valid state.
SystemState flow_evaluate(const SystemModel& model, const SystemState& z, double h);

}  // namespace pdmpis
