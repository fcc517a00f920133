#include "pdmpis/law.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pdmpis/error.hpp"
#include "pdmpis/numeric.hpp"

namespace pdmpis {

namespace {

using Buffer = std::array<double, kMaxComponents>;

void check_size(std::span<double> out, std::size_t d) {
  if (out.size() != d) throw Error(ErrorKind::invalid_argument, "rate buffer has wrong size");
}

}  // namespace

void MarkovLaw::integrated_rates(const SystemState& z, double h, std::span<double> out) const {
  const std::size_t d = model().component_count();
  check_size(out, d);
  for (std::size_t j = 0; j < d; ++j) {
    auto f = [&](double u) {
      Buffer buf{};
      marginal_rates(model().flow(z, u), std::span<double>(buf.data(), d));
      return buf[j];
    };
    out[j] = h > 0.0 ? adaptive_simpson(f, 0.0, h, 1e-12) : 0.0;
  }
}

double MarkovLaw::intensity(const SystemState& z) const {
  const std::size_t d = model().component_count();
  Buffer buf{};
  marginal_rates(z, std::span<double>(buf.data(), d));
  CompensatedSum s;
  for (std::size_t j = 0; j < d; ++j) s += buf[j];
  return s.value();
}

double MarkovLaw::integrated_intensity(const SystemState& z, double h) const {
  const std::size_t d = model().component_count();
  Buffer buf{};
  integrated_rates(z, h, std::span<double>(buf.data(), d));
  CompensatedSum s;
  for (std::size_t j = 0; j < d; ++j) s += buf[j];
  return s.value();
}

std::vector<KernelPoint> MarkovLaw::kernel_support(const SystemState& pre) const {
  const std::size_t d = model().component_count();
  Buffer buf{};
  marginal_rates(pre, std::span<double>(buf.data(), d));
  CompensatedSum total;
  for (std::size_t j = 0; j < d; ++j) total += buf[j];
  std::vector<KernelPoint> out;
  if (!(total.value() > 0.0)) return out;
  for (std::size_t j = 0; j < d; ++j) {
    if (buf[j] > 0.0) out.push_back({j, model().jump_target(pre, j), buf[j] / total.value()});
  }
  return out;
}

double MarkovLaw::kernel_density(const SystemState& pre, const SystemState& post) const {
  double mass = 0.0;
  for (const auto& p : kernel_support(pre)) {
    if (p.state == post) mass += p.mass;
  }
  return mass;
}

AffineLaw::AffineLaw(const SystemModel& model) : AffineLaw(model, model.nominal_rates()) {}

AffineLaw::AffineLaw(const SystemModel& model, RateTable rates)
    : MarkovLaw(model), rates_(std::move(rates)) {
  if (rates_.component_count() != model.component_count()) {
    throw Error(ErrorKind::model_definition, "rate table size differs from component count");
  }
}

void AffineLaw::mode_weights(std::span<const std::int8_t>, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 1.0);
}

void AffineLaw::rates_at(std::span<const std::int8_t> mode, double covariate,
                         std::span<double> out) const {
  const std::size_t d = model().component_count();
  check_size(out, d);
  mode_weights(mode, out);
  for (std::size_t j = 0; j < d; ++j) out[j] *= rates_.at(j, mode[j]).at(covariate);
}

void AffineLaw::integrals_given(std::span<const std::int8_t> mode, double h,
                                double covariate_integral, std::span<double> out) const {
  const std::size_t d = model().component_count();
  check_size(out, d);
  mode_weights(mode, out);
  for (std::size_t j = 0; j < d; ++j) {
    const AffineRate& r = rates_.at(j, mode[j]);
    out[j] *= r.intercept * h + r.slope * covariate_integral;
  }
}

void AffineLaw::marginal_rates(const SystemState& z, std::span<double> out) const {
  rates_at(z.mode, model().covariate(z), out);
}

void AffineLaw::integrated_rates(const SystemState& z, double h, std::span<double> out) const {
  integrals_given(z.mode, h, h > 0.0 ? model().covariate_integral(z, h) : 0.0, out);
}

double AffineLaw::majorant(const SystemState& z, double h) const {
  const std::size_t d = model().component_count();
  const CovariateRange range = model().covariate_range(z, h);
  Buffer w{};
  mode_weights(z.mode, std::span<double>(w.data(), d));
  CompensatedSum s;
  for (std::size_t j = 0; j < d; ++j) {
    const AffineRate& r = rates_.at(j, z.mode[j]);
    s += w[j] * std::max({r.at(range.lo), r.at(range.hi), 0.0});
  }
  return s.value();
}

FunctionLaw::FunctionLaw(const SystemModel& model, RateFn rates, MajorantFn majorant)
    : MarkovLaw(model), rates_(std::move(rates)), majorant_(std::move(majorant)) {}

void FunctionLaw::marginal_rates(const SystemState& z, std::span<double> out) const {
  check_size(out, model().component_count());
  rates_(z, out);
}

double FunctionLaw::majorant(const SystemState& z, double h) const { return majorant_(z, h); }

}  // namespace pdmpis
