#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pdmpis/law.hpp"
#include "pdmpis/model.hpp"
#include "pdmpis/rng.hpp"
#include "pdmpis/state.hpp"

namespace pdmpis {

enum class SegmentEnd { spontaneous, boundary, horizon };

struct JumpTimeSample {
  double time = 0.0;
  SegmentEnd kind = SegmentEnd::horizon;
};

/// Waiting time from z by thinning against a constant majorant. Proposals
/// beyond min(boundary time, residual) truncate the segment; the boundary
/// wins a tie with the residual horizon.
JumpTimeSample sample_jump_time(const SystemModel& model, const MarkovLaw& law,
                                const SystemState& z, double majorant, double residual,
                                RandomStream& rng);

/// Post-jump state and the toggled component.
std::pair<SystemState, std::size_t> sample_post_jump(const MarkovLaw& law, const SystemState& pre,
                                                     RandomStream& rng);

struct SimulationOptions {
  std::size_t max_jumps = 1'000'000;
};

Trajectory simulate_trajectory(const SystemModel& model, const MarkovLaw& law, RandomStream& rng,
                               const SimulationOptions& options = {});

/// Same path as simulate_trajectory, reporting only whether it failed.
bool simulate_failure(const SystemModel& model, const MarkovLaw& law, RandomStream& rng,
                      const SimulationOptions& options = {});

/// Log density of the trajectory under `law` (minus infinity when a jump has
/// zero kernel mass).
double log_density(const Trajectory& trajectory, const MarkovLaw& law);

struct ValidationReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kernel_min = 0.0;
  double kernel_max = 0.0;
  /// Smallest boundary time seen right after a boundary jump (+inf if none).
  double t_eps = 0.0;
  std::size_t probes = 0;
  bool zero_rate_on_support = false;
  std::vector<std::string> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// Probes rate and kernel bounds over states visited by simulated paths.
ValidationReport validate_assumptions(const SystemModel& model, const MarkovLaw& law,
                                      std::size_t probe_budget, std::uint64_t seed = 1);

}  // namespace pdmpis
