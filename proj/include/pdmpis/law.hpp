#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pdmpis/model.hpp"
#include "pdmpis/state.hpp"

namespace pdmpis {

struct KernelPoint {
  std::size_t component = 0;
  SystemState state;
  double mass = 0.0;
};

/// Jump law of a component-toggle PDMP: marginal rates per component, with
/// intensity = sum of marginals and kernel mass lambda_j / lambda on the
/// toggle of component j. Laws reference their model, which must outlive them.
class MarkovLaw {
 public:
  explicit MarkovLaw(const SystemModel& model) : model_(&model) {}
  virtual ~MarkovLaw() = default;

  const SystemModel& model() const noexcept { return *model_; }

  virtual void marginal_rates(const SystemState& z, std::span<double> out) const = 0;

  /// Integral over [0, h] of each marginal rate along the flow from z.
  /// Default: adaptive Simpson, absolute tolerance 1e-12.
  virtual void integrated_rates(const SystemState& z, double h, std::span<double> out) const;

  /// Upper bound of the intensity along the flow from z over [0, h].
  virtual double majorant(const SystemState& z, double h) const = 0;

  double intensity(const SystemState& z) const;
  double integrated_intensity(const SystemState& z, double h) const;

  /// Toggle targets with positive mass.
  std::vector<KernelPoint> kernel_support(const SystemState& pre) const;
  double kernel_density(const SystemState& pre, const SystemState& post) const;

 private:
  const SystemModel* model_;
};

/// Rates w_j(mode) * (a_j(status) + b_j(status) * covariate); integrals and
/// majorants come in closed form from the model's covariate path.
class AffineLaw : public MarkovLaw {
 public:
  explicit AffineLaw(const SystemModel& model);
  AffineLaw(const SystemModel& model, RateTable rates);

  const RateTable& rates() const noexcept { return rates_; }

  /// Multiplicative per-component factors; all ones for the plain law.
  virtual void mode_weights(std::span<const std::int8_t> mode, std::span<double> out) const;

  void rates_at(std::span<const std::int8_t> mode, double covariate, std::span<double> out) const;
  void integrals_given(std::span<const std::int8_t> mode, double h, double covariate_integral,
                       std::span<double> out) const;

  void marginal_rates(const SystemState& z, std::span<double> out) const override;
  void integrated_rates(const SystemState& z, double h, std::span<double> out) const override;
  double majorant(const SystemState& z, double h) const override;

 private:
  RateTable rates_;
};

/// Law given by an arbitrary rate callback; integrals use quadrature.
class FunctionLaw : public MarkovLaw {
 public:
  using RateFn = std::function<void(const SystemState&, std::span<double>)>;
  using MajorantFn = std::function<double(const SystemState&, double)>;

  FunctionLaw(const SystemModel& model, RateFn rates, MajorantFn majorant);

  void marginal_rates(const SystemState& z, std::span<double> out) const override;
  double majorant(const SystemState& z, double h) const override;

 private:
  RateFn rates_;
  MajorantFn majorant_;
};

}  // namespace pdmpis
