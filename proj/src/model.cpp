#include "pdmpis/model.hpp"

#include <algorithm>
#include <cmath>

#include "pdmpis/error.hpp"

namespace pdmpis {

RateTable::RateTable(std::size_t components, std::vector<std::int8_t> alphabet)
    : d_(components), alphabet_(std::move(alphabet)) {
  if (alphabet_.empty()) throw Error(ErrorKind::invalid_argument, "empty status alphabet");
  const auto [lo, hi] = std::minmax_element(alphabet_.begin(), alphabet_.end());
  min_status_ = *lo;
  width_ = static_cast<std::size_t>(*hi - *lo) + 1;
  data_.assign(d_ * width_, AffineRate{});
}

std::size_t RateTable::index(std::size_t component, std::int8_t status) const {
  if (component >= d_ || status < min_status_ ||
      static_cast<std::size_t>(status - min_status_) >= width_) {
    throw Error(ErrorKind::invalid_argument, "rate table index out of range");
  }
  return component * width_ + static_cast<std::size_t>(status - min_status_);
}

AffineRate& RateTable::at(std::size_t component, std::int8_t status) {
  return data_[index(component, status)];
}

const AffineRate& RateTable::at(std::size_t component, std::int8_t status) const {
  return data_[index(component, status)];
}

RateTable RateTable::scaled(std::size_t component, std::int8_t status, double factor) const {
  RateTable out = *this;
  AffineRate& r = out.at(component, status);
  r.intercept *= factor;
  r.slope *= factor;
  return out;
}

SystemModel::SystemModel(Common common, StructureFunction structure, RateTable nominal)
    : common_(std::move(common)),
      structure_(std::move(structure)),
      decomposition_(decompose(structure_)),
      nominal_(std::move(nominal)) {
  const auto& a = common_.alphabet;
  auto has = [&](std::int8_t s) { return std::find(a.begin(), a.end(), s) != a.end(); };
  if (!has(common_.broken_status) || !has(common_.repaired_status)) {
    throw Error(ErrorKind::model_definition, "broken/repaired status missing from alphabet");
  }
  if (nominal_.component_count() != structure_.component_count()) {
    throw Error(ErrorKind::model_definition, "rate table size differs from component count");
  }
  if (!(common_.horizon > 0.0) || !std::isfinite(common_.horizon)) {
    throw Error(ErrorKind::model_definition, "horizon must be positive and finite");
  }
  if (common_.time_coordinate >= common_.position_size) {
    throw Error(ErrorKind::model_definition, "time coordinate outside position");
  }
}

std::optional<SystemState> SystemModel::boundary_jump(const SystemState&) const {
  return std::nullopt;
}

void SystemModel::reconfigure(std::vector<std::int8_t>&) const {}

void SystemModel::after_jump(SystemState&) const {}

double SystemModel::covariate(const SystemState&) const { return 0.0; }

double SystemModel::covariate_integral(const SystemState&, double) const { return 0.0; }

CovariateRange SystemModel::covariate_range(const SystemState& z, double h) const {
  const double a = covariate(z);
  const double b = std::isfinite(h) ? covariate(flow(z, h)) : a;
  return {std::min(a, b), std::max(a, b)};
}

void SystemModel::validate(const SystemState& z) const {
  if (z.position.size() != common_.position_size) {
    throw Error(ErrorKind::invalid_state, "position has wrong length");
  }
  if (z.mode.size() != component_count()) {
    throw Error(ErrorKind::invalid_state, "mode length differs from component count");
  }
  for (double x : z.position) {
    if (!std::isfinite(x)) throw Error(ErrorKind::invalid_state, "non-finite position");
  }
  const auto& a = common_.alphabet;
  for (std::int8_t s : z.mode) {
    if (std::find(a.begin(), a.end(), s) == a.end()) {
      throw Error(ErrorKind::invalid_state, "status code outside the alphabet");
    }
  }
  const double t = elapsed(z);
  if (t < 0.0 || t > common_.horizon * (1.0 + 1e-12)) {
    throw Error(ErrorKind::invalid_state, "elapsed time outside [0, t_max]");
  }
}

ComponentMask SystemModel::broken_mask(std::span<const std::int8_t> mode) const noexcept {
  ComponentMask m = 0;
  for (std::size_t j = 0; j < mode.size(); ++j) {
    if (is_broken(mode[j])) m |= ComponentMask{1} << j;
  }
  return m;
}

bool SystemModel::in_failure_modes(std::span<const std::int8_t> mode) const {
  const ComponentMask working = ~broken_mask(mode) & full_mask(component_count());
  return !structure_.evaluate(working);
}

SystemState SystemModel::jump_target(const SystemState& pre, std::size_t component) const {
  if (component >= component_count()) {
    throw Error(ErrorKind::invalid_argument, "component index out of range");
  }
  SystemState post = pre;
  post.mode[component] = toggled(pre.mode[component]);
  reconfigure(post.mode);
  after_jump(post);
  return post;
}

SystemState flow_evaluate(const SystemModel& model, const SystemState& z, double h) {
  if (!(h >= 0.0)) throw Error(ErrorKind::invalid_argument, "flow duration must be >= 0");
  model.validate(z);
  return model.flow(z, h);
}

}  // namespace pdmpis
