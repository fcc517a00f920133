#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace pdmpis {

/// Sorted list of 0-based component ids.
using ComponentSet = std::vector<std::size_t>;

/// Component masks use bit j for component j; the structure module supports
/// up to 64 components.
using ComponentMask = std::uint64_t;

inline constexpr std::size_t kMaxComponents = 64;
inline constexpr std::size_t kMaxExhaustiveComponents = 20;

ComponentMask to_mask(const ComponentSet& set);
ComponentSet to_set(ComponentMask mask);
inline ComponentMask full_mask(std::size_t d) {
  return d >= 64 ? ~ComponentMask{0} : ((ComponentMask{1} << d) - 1);
}

/// Nested series/parallel grouping of components. A component may appear in
/// several places (shared supports such as a common power line).
class SpDiagram {
 public:
  enum class Kind { component, series, parallel };

  static SpDiagram component(std::size_t id);
  static SpDiagram series(std::vector<SpDiagram> children);
  static SpDiagram parallel(std::vector<SpDiagram> children);

  Kind kind() const noexcept { return kind_; }
  std::size_t id() const noexcept { return id_; }
  const std::vector<SpDiagram>& children() const noexcept { return children_; }

  /// 1 when the system works given the set of working components.
  bool evaluate(ComponentMask working) const;

  /// Minimal path sets by structural expansion (distributivity + absorption).
  std::vector<ComponentMask> path_masks() const;
  /// Minimal cut sets by the dual expansion.
  std::vector<ComponentMask> cut_masks() const;

  ComponentMask support() const;

 private:
  Kind kind_ = Kind::component;
  std::size_t id_ = 0;
  std::vector<SpDiagram> children_;
};

/// Boolean structure function phi: {0,1}^d -> {0,1}, 1 = system works.
/// Inputs are masks of *working* components.
class StructureFunction {
 public:
  StructureFunction(std::size_t components, SpDiagram diagram);
  StructureFunction(std::size_t components, std::function<bool(ComponentMask)> predicate);

  std::size_t component_count() const noexcept { return d_; }
  bool evaluate(ComponentMask working) const;
  const SpDiagram* diagram() const noexcept { return diagram_.get(); }

  /// b -> 1 - phi(1 - b).
  StructureFunction dual() const;

 private:
  std::size_t d_;
  std::shared_ptr<const SpDiagram> diagram_;
  std::function<bool(ComponentMask)> predicate_;
};

struct CoherenceReport {
  bool coherent = true;
  bool exhaustive = true;
  std::vector<std::string> violations;
};

/// Checks phi(1..1) = 1, phi(0..0) = 0 and monotonicity. Exhaustive up to
/// 20 components, randomized pair probing above.
CoherenceReport check_coherent(const StructureFunction& sf, std::size_t probes = 100000,
                               std::uint64_t seed = 1);

/// Minimal true points of a monotone function by scanning all 2^d inputs.
std::vector<ComponentMask> minimal_true_points(const StructureFunction& sf);

/// Canonical order: size ascending, then lexicographic on sorted ids.
void canonical_sort(std::vector<ComponentSet>& sets);
/// Removes non-minimal sets (supersets of another set) and duplicates.
std::vector<ComponentMask> minimize_antichain(std::vector<ComponentMask> sets);

std::vector<ComponentSet> enumerate_mps(const StructureFunction& sf);
std::vector<ComponentSet> enumerate_mcs(const StructureFunction& sf);

struct CutPathDecomposition {
  std::size_t components = 0;
  std::vector<ComponentSet> mps;
  std::vector<ComponentSet> mcs;
  std::vector<ComponentMask> mps_masks;
  std::vector<ComponentMask> mcs_masks;
  std::vector<double> mcs_sizes;

  static CutPathDecomposition from_sets(std::size_t components, std::vector<ComponentSet> mps,
                                        std::vector<ComponentSet> mcs);
};

CutPathDecomposition decompose(const StructureFunction& sf);

/// Number of minimal path sets holding at least one broken component.
std::size_t damaged_mps_count(const CutPathDecomposition& decomp, ComponentMask broken);

/// Per-MCS broken fractions sorted descending (stable on canonical MCS order).
std::vector<double> mcs_broken_fractions(const CutPathDecomposition& decomp, ComponentMask broken);
void mcs_broken_fractions(const CutPathDecomposition& decomp, ComponentMask broken,
                          std::vector<double>& out);

/// True iff every MPS is damaged; cross-checked against "some MCS fully broken".
bool failure_mode_test(const CutPathDecomposition& decomp, ComponentMask broken);

}  // namespace pdmpis
