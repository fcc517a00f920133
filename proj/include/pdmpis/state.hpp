#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace pdmpis {

/// Position (physical variables plus elapsed time) and mode (per-component
/// status codes) of the process at one instant.
struct SystemState {
  std::vector<double> position;
  std::vector<std::int8_t> mode;

  bool operator==(const SystemState&) const = default;
};

enum class JumpKind { spontaneous, boundary };

struct JumpRecord {
  double waiting_time = 0.0;
  JumpKind kind = JumpKind::spontaneous;
  SystemState pre_jump;
  SystemState post_jump;
  std::optional<std::size_t> component;
};

/// Jump skeleton of one path. The final segment runs from the last post-jump
/// state (or the initial state) for `final_duration` hours and ends either at
/// the horizon or by absorption in the failure region.
struct Trajectory {
  SystemState initial_state;
  std::vector<JumpRecord> jumps;
  SystemState final_state;
  double final_duration = 0.0;
  bool failed = false;

  std::size_t n_jumps() const noexcept { return jumps.size(); }
};

}  // namespace pdmpis
