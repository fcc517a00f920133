#include "pdmpis/importance.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>

#include "pdmpis/error.hpp"
#include "pdmpis/numeric.hpp"

namespace pdmpis {

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::bc: return "bc";
    case Family::mps: return "mps";
    case Family::mcs: return "mcs";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "bc") return Family::bc;
  if (name == "mps") return Family::mps;
  if (name == "mcs") return Family::mcs;
  throw Error(ErrorKind::config, "unknown importance family '" + std::string(name) + "'");
}

std::size_t theta_dimension(Family family, const CutPathDecomposition& decomp) {
  switch (family) {
    case Family::bc: return decomp.components;
    case Family::mps: return decomp.mps.size();
    case Family::mcs: return decomp.mcs.size();
  }
  return 0;
}

std::size_t reduced_dimension(std::size_t full_dim, std::size_t packet_size) {
  if (packet_size == 0) throw Error(ErrorKind::invalid_argument, "packet size must be >= 1");
  return (full_dim + packet_size - 1) / packet_size;
}

std::vector<double> expand_theta(std::span<const double> reduced, std::size_t packet_size,
                                 std::size_t full_dim) {
  if (reduced.size() != reduced_dimension(full_dim, packet_size)) {
    throw Error(ErrorKind::invalid_argument, "reduced theta has length " +
                                                 std::to_string(reduced.size()) + ", expected " +
                                                 std::to_string(reduced_dimension(full_dim, packet_size)));
  }
  std::vector<double> full(full_dim);
  for (std::size_t i = 0; i < full_dim; ++i) full[i] = reduced[i / packet_size];
  return full;
}

std::vector<double> contract_theta(std::span<const double> full, std::size_t packet_size) {
  std::vector<double> out(reduced_dimension(full.size(), packet_size));
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = full[p * packet_size];
  return out;
}

std::vector<double> reduce_gradient(std::span<const double> full_grad, std::size_t packet_size) {
  std::vector<double> out(reduced_dimension(full_grad.size(), packet_size), 0.0);
  for (std::size_t i = 0; i < full_grad.size(); ++i) out[i / packet_size] += full_grad[i];
  return out;
}

void ThetaParam::check() const {
  const std::size_t n = reduced_dimension(full_dim, packet_size);
  if (reduced.size() != n || lo.size() != n || hi.size() != n) {
    throw Error(ErrorKind::invalid_argument, "theta, bounds and packet layout disagree");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] > hi[i]) {
      throw Error(ErrorKind::invalid_argument, "theta box must be finite and nonempty");
    }
    if (reduced[i] < lo[i] || reduced[i] > hi[i]) {
      throw Error(ErrorKind::invalid_argument, "theta outside its box");
    }
  }
}

ThetaParam make_theta(Family family, const CutPathDecomposition& decomp, std::size_t packet_size,
                      std::vector<double> reduced) {
  ThetaParam p;
  p.family = family;
  p.packet_size = packet_size;
  p.full_dim = theta_dimension(family, decomp);
  const std::size_t n = reduced_dimension(p.full_dim, packet_size);
  p.lo.assign(n, 0.0);
  p.hi.assign(n, 3.0 / std::sqrt(static_cast<double>(n)));
  p.reduced = reduced.empty() ? std::vector<double>(n, 0.0) : std::move(reduced);
  p.check();
  return p;
}

ImportanceFunction::ImportanceFunction(Family family, const CutPathDecomposition& decomp,
                                       std::vector<double> theta_full)
    : family_(family), decomp_(&decomp), theta_(std::move(theta_full)) {
  if (theta_.size() != theta_dimension(family, decomp)) {
    throw Error(ErrorKind::invalid_argument, "theta length does not match the family dimension");
  }
  prefix_.assign(theta_.size() + 1, 0.0);
  for (std::size_t i = 0; i < theta_.size(); ++i) prefix_[i + 1] = prefix_[i] + theta_[i];
}

std::size_t ImportanceFunction::count(ComponentMask broken) const {
  if (family_ == Family::bc) {
    return static_cast<std::size_t>(std::popcount(broken & full_mask(decomp_->components)));
  }
  return damaged_mps_count(*decomp_, broken);
}

double ImportanceFunction::log_value(ComponentMask broken) const {
  if (family_ != Family::mcs) {
    const double s = prefix_[count(broken)];
    return s * s;
  }
  std::vector<double> f;
  mcs_broken_fractions(*decomp_, broken, f);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += theta_[i] * f[i];
  return s * s;
}

void ImportanceFunction::grad_log_value(ComponentMask broken, std::span<double> out) const {
  if (out.size() != theta_.size()) {
    throw Error(ErrorKind::invalid_argument, "gradient buffer has wrong size");
  }
  if (family_ != Family::mcs) {
    const std::size_t beta = count(broken);
    const double g = 2.0 * prefix_[beta];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i < beta ? g : 0.0;
    return;
  }
  std::vector<double> f;
  mcs_broken_fractions(*decomp_, broken, f);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += theta_[i] * f[i];
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = 2.0 * s * f[i];
}

namespace {

std::atomic<std::uint64_t> next_law_id{1};

struct WeightCache {
  std::uint64_t owner = 0;
  ComponentMask mask = 0;
  std::array<double, kMaxComponents> weights{};
};

}  // namespace

BiasedLaw::BiasedLaw(const SystemModel& model, ImportanceFunction iff)
    : BiasedLaw(model, model.nominal_rates(), std::move(iff)) {}

BiasedLaw::BiasedLaw(const SystemModel& model, RateTable nominal, ImportanceFunction iff)
    : AffineLaw(model, std::move(nominal)), iff_(std::move(iff)), id_(next_law_id++) {
  if (iff_.decomposition().components != model.component_count()) {
    throw Error(ErrorKind::invalid_argument, "importance function built for another model");
  }
}

void BiasedLaw::mode_weights(std::span<const std::int8_t> mode, std::span<double> out) const {
  thread_local WeightCache cache;
  const ComponentMask mask = model().broken_mask(mode);
  const std::size_t d = model().component_count();
  if (cache.owner != id_ || cache.mask != mask) {
    const double here = iff_.log_value(mask);
    for (std::size_t j = 0; j < d; ++j) {
      cache.weights[j] = std::exp(iff_.log_value(mask ^ (ComponentMask{1} << j)) - here);
    }
    cache.owner = id_;
    cache.mask = mask;
  }
  std::copy_n(cache.weights.begin(), d, out.begin());
}

double if_value(const ImportanceFunction& iff, const SystemModel& model, const SystemState& z) {
  return iff.log_value(model.broken_mask(z.mode));
}

std::vector<double> grad_log_if(const ImportanceFunction& iff, const SystemModel& model,
                                const SystemState& z) {
  std::vector<double> g(iff.theta().size());
  iff.grad_log_value(model.broken_mask(z.mode), g);
  return g;
}

double if_minus(const ImportanceFunction& iff, const MarkovLaw& nominal, const SystemState& z) {
  const auto support = nominal.kernel_support(z);
  if (support.empty()) throw Error(ErrorKind::model_definition, "empty kernel support");
  std::vector<double> terms;
  terms.reserve(support.size());
  for (const auto& p : support) {
    terms.push_back(std::log(p.mass) + if_value(iff, nominal.model(), p.state));
  }
  return log_sum_exp(terms);
}

double biased_intensity(const ImportanceFunction& iff, const MarkovLaw& nominal,
                        const SystemState& z) {
  const double lambda0 = nominal.intensity(z);
  if (lambda0 == 0.0) return 0.0;
  return lambda0 * std::exp(if_minus(iff, nominal, z) - if_value(iff, nominal.model(), z));
}

std::vector<KernelPoint> biased_kernel(const ImportanceFunction& iff, const MarkovLaw& nominal,
                                       const SystemState& pre) {
  auto support = nominal.kernel_support(pre);
  if (support.empty()) throw Error(ErrorKind::model_definition, "empty kernel support");
  std::vector<double> logs;
  logs.reserve(support.size());
  for (const auto& p : support) {
    logs.push_back(std::log(p.mass) + if_value(iff, nominal.model(), p.state));
  }
  const double norm = log_sum_exp(logs);
  for (std::size_t i = 0; i < support.size(); ++i) support[i].mass = std::exp(logs[i] - norm);
  return support;
}

}  // namespace pdmpis
