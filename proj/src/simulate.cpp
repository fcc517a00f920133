#include "pdmpis/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pdmpis/error.hpp"
#include "pdmpis/numeric.hpp"

namespace pdmpis {

namespace {

using Buffer = std::array<double, kMaxComponents>;

constexpr double kMajorantSlack = 1e-9;

}  // namespace

JumpTimeSample sample_jump_time(const SystemModel& model, const MarkovLaw& law,
                                const SystemState& z, double majorant, double residual,
                                RandomStream& rng) {
  const double tb = model.boundary_time(z);
  const double limit = std::min(tb, residual);
  const SegmentEnd end = tb <= residual ? SegmentEnd::boundary : SegmentEnd::horizon;
  if (!(majorant >= 0.0) || std::isinf(majorant)) {
    throw Error(ErrorKind::majorant_violation, "majorant is not a finite nonnegative rate");
  }
  if (majorant == 0.0) return {limit, end};
  double t = 0.0;
  for (;;) {
    t += rng.exponential(majorant);
    if (t >= limit) return {limit, end};
    const double lambda = law.intensity(model.flow(z, t));
    if (lambda > majorant * (1.0 + kMajorantSlack)) {
      throw Error(ErrorKind::majorant_violation,
                  "intensity " + std::to_string(lambda) + " exceeds majorant " +
                      std::to_string(majorant));
    }
    if (rng.uniform() * majorant <= lambda) return {t, SegmentEnd::spontaneous};
  }
}

std::pair<SystemState, std::size_t> sample_post_jump(const MarkovLaw& law, const SystemState& pre,
                                                     RandomStream& rng) {
  const std::size_t d = law.model().component_count();
  Buffer rates{};
  law.marginal_rates(pre, std::span<double>(rates.data(), d));
  double total = 0.0;
  for (std::size_t j = 0; j < d; ++j) total += rates[j];
  if (!(total > 0.0)) throw Error(ErrorKind::model_definition, "empty kernel support");
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t chosen = d;
  for (std::size_t j = 0; j < d; ++j) {
    if (rates[j] <= 0.0) continue;
    chosen = j;
    acc += rates[j];
    if (target < acc) break;
  }
  return {law.model().jump_target(pre, chosen), chosen};
}

namespace {

template <typename OnJump>
bool run_path(const SystemModel& model, const MarkovLaw& law, RandomStream& rng,
              const SimulationOptions& options, SystemState& z, double& final_duration,
              OnJump&& on_jump) {
  const double t_max = model.horizon();
  std::size_t jumps = 0;
  for (;;) {
    const double residual = std::max(0.0, t_max - model.elapsed(z));
    const double limit = std::min(model.boundary_time(z), residual);
    const double m = law.majorant(z, limit);
    const JumpTimeSample s = sample_jump_time(model, law, z, m, residual, rng);
    if (s.kind == SegmentEnd::horizon) {
      final_duration = s.time;
      z = model.flow(z, s.time);
      return false;
    }
    SystemState pre = model.flow(z, s.time);
    if (s.kind == SegmentEnd::boundary) {
      auto next = model.boundary_jump(pre);
      if (!next) {
        final_duration = s.time;
        z = std::move(pre);
        return true;
      }
      on_jump(s.time, JumpKind::boundary, pre, *next, std::nullopt);
      z = std::move(*next);
    } else {
      auto [post, j] = sample_post_jump(law, pre, rng);
      on_jump(s.time, JumpKind::spontaneous, pre, post, std::optional<std::size_t>(j));
      z = std::move(post);
    }
    if (++jumps > options.max_jumps) {
      throw Error(ErrorKind::runaway_simulation,
                  "more than " + std::to_string(options.max_jumps) + " jumps in one trajectory");
    }
  }
}

}  // namespace

Trajectory simulate_trajectory(const SystemModel& model, const MarkovLaw& law, RandomStream& rng,
                               const SimulationOptions& options) {
  Trajectory traj;
  traj.initial_state = model.initial_state();
  SystemState z = traj.initial_state;
  traj.failed = run_path(model, law, rng, options, z, traj.final_duration,
                         [&](double w, JumpKind kind, const SystemState& pre,
                             const SystemState& post, std::optional<std::size_t> j) {
                           traj.jumps.push_back({w, kind, pre, post, j});
                         });
  traj.final_state = std::move(z);
  return traj;
}

bool simulate_failure(const SystemModel& model, const MarkovLaw& law, RandomStream& rng,
                      const SimulationOptions& options) {
  SystemState z = model.initial_state();
  double final_duration = 0.0;
  return run_path(model, law, rng, options, z, final_duration,
                  [](double, JumpKind, const SystemState&, const SystemState&,
                     std::optional<std::size_t>) {});
}

double log_density(const Trajectory& trajectory, const MarkovLaw& law) {
  const std::size_t d = law.model().component_count();
  CompensatedSum total;
  const SystemState* start = &trajectory.initial_state;
  for (const auto& jump : trajectory.jumps) {
    total += -law.integrated_intensity(*start, jump.waiting_time);
    if (jump.kind == JumpKind::spontaneous) {
      if (jump.component) {
        Buffer rates{};
        law.marginal_rates(jump.pre_jump, std::span<double>(rates.data(), d));
        total += std::log(rates[*jump.component]);
      } else {
        total += std::log(law.intensity(jump.pre_jump));
        total += std::log(law.kernel_density(jump.pre_jump, jump.post_jump));
      }
    }
    start = &jump.post_jump;
  }
  total += -law.integrated_intensity(*start, trajectory.final_duration);
  return total.value();
}

ValidationReport validate_assumptions(const SystemModel& model, const MarkovLaw& law,
                                      std::size_t probe_budget, std::uint64_t seed) {
  ValidationReport rep;
  rep.lambda_min = kInf;
  rep.lambda_max = 0.0;
  rep.kernel_min = kInf;
  rep.kernel_max = 0.0;
  rep.t_eps = kInf;
  const std::size_t d = model.component_count();
  auto probe = [&](const SystemState& z) {
    ++rep.probes;
    Buffer rates{};
    law.marginal_rates(z, std::span<double>(rates.data(), d));
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (!(rates[j] >= 0.0) || !std::isfinite(rates[j])) {
        rep.violations.push_back("negative or non-finite marginal rate");
      }
      if (rates[j] == 0.0) rep.zero_rate_on_support = true;
      total += rates[j];
    }
    rep.lambda_min = std::min(rep.lambda_min, total);
    rep.lambda_max = std::max(rep.lambda_max, total);
    if (total > 0.0) {
      for (std::size_t j = 0; j < d; ++j) {
        rep.kernel_min = std::min(rep.kernel_min, rates[j] / total);
        rep.kernel_max = std::max(rep.kernel_max, rates[j] / total);
      }
    }
  };
  for (std::size_t i = 0; i < probe_budget; ++i) {
    RandomStream rng(seed, i);
    const Trajectory traj = simulate_trajectory(model, law, rng);
    probe(traj.initial_state);
    for (const auto& jump : traj.jumps) {
      probe(jump.pre_jump);
      probe(jump.post_jump);
      if (jump.kind == JumpKind::boundary) {
        rep.t_eps = std::min(rep.t_eps, model.boundary_time(jump.post_jump));
      }
    }
    probe(traj.final_state);
  }
  if (rep.zero_rate_on_support) rep.violations.push_back("zero marginal rate on the support");
  if (rep.probes > 0 && !(rep.lambda_min > 0.0)) rep.violations.push_back("zero intensity");
  if (!std::isfinite(rep.lambda_max)) rep.violations.push_back("unbounded intensity");
  if (rep.t_eps <= 0.0) rep.violations.push_back("zero boundary time after a boundary jump");
  std::sort(rep.violations.begin(), rep.violations.end());
  rep.violations.erase(std::unique(rep.violations.begin(), rep.violations.end()),
                       rep.violations.end());
  return rep;
}

}  // namespace pdmpis
