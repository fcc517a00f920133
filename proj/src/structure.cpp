#include "pdmpis/structure.hpp"

#include <algorithm>
#include <bit>

#include "pdmpis/error.hpp"
#include "pdmpis/rng.hpp"

namespace pdmpis {

ComponentMask to_mask(const ComponentSet& set) {
  ComponentMask m = 0;
  for (std::size_t id : set) {
    if (id >= kMaxComponents) throw Error(ErrorKind::invalid_argument, "component id >= 64");
    m |= ComponentMask{1} << id;
  }
  return m;
}

ComponentSet to_set(ComponentMask mask) {
  ComponentSet out;
  while (mask != 0) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

SpDiagram SpDiagram::component(std::size_t id) {
  if (id >= kMaxComponents) throw Error(ErrorKind::invalid_argument, "component id >= 64");
  SpDiagram d;
  d.kind_ = Kind::component;
  d.id_ = id;
  return d;
}

SpDiagram SpDiagram::series(std::vector<SpDiagram> children) {
  if (children.empty()) throw Error(ErrorKind::invalid_argument, "empty series group");
  SpDiagram d;
  d.kind_ = Kind::series;
  d.children_ = std::move(children);
  return d;
}

SpDiagram SpDiagram::parallel(std::vector<SpDiagram> children) {
  if (children.empty()) throw Error(ErrorKind::invalid_argument, "empty parallel group");
  SpDiagram d;
  d.kind_ = Kind::parallel;
  d.children_ = std::move(children);
  return d;
}

bool SpDiagram::evaluate(ComponentMask working) const {
  switch (kind_) {
    case Kind::component: return (working >> id_) & 1u;
    case Kind::series:
      return std::all_of(children_.begin(), children_.end(),
                         [&](const SpDiagram& c) { return c.evaluate(working); });
    case Kind::parallel:
      return std::any_of(children_.begin(), children_.end(),
                         [&](const SpDiagram& c) { return c.evaluate(working); });
  }
  return false;
}

ComponentMask SpDiagram::support() const {
  if (kind_ == Kind::component) return ComponentMask{1} << id_;
  ComponentMask m = 0;
  for (const auto& c : children_) m |= c.support();
  return m;
}

std::vector<ComponentMask> minimize_antichain(std::vector<ComponentMask> sets) {
  std::sort(sets.begin(), sets.end(), [](ComponentMask a, ComponentMask b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  std::vector<ComponentMask> kept;
  for (ComponentMask s : sets) {
    const bool dominated = std::any_of(kept.begin(), kept.end(),
                                       [s](ComponentMask k) { return (k & s) == k; });
    if (!dominated) kept.push_back(s);
  }
  return kept;
}

namespace {

// "and" of two families of minimal sets: pairwise unions, then absorption.
std::vector<ComponentMask> cross(const std::vector<ComponentMask>& a,
                                 const std::vector<ComponentMask>& b) {
  std::vector<ComponentMask> out;
  out.reserve(a.size() * b.size());
  for (ComponentMask x : a) {
    for (ComponentMask y : b) out.push_back(x | y);
  }
  return minimize_antichain(std::move(out));
}

std::vector<ComponentMask> expand(const SpDiagram& d, bool paths) {
  using Kind = SpDiagram::Kind;
  if (d.kind() == Kind::component) return {ComponentMask{1} << d.id()};
  // For paths a series group multiplies and a parallel group unions; cuts swap.
  const bool multiply = (d.kind() == Kind::series) == paths;
  std::vector<ComponentMask> acc;
  bool first = true;
  for (const auto& child : d.children()) {
    auto sub = expand(child, paths);
    if (first) {
      acc = std::move(sub);
      first = false;
    } else if (multiply) {
      acc = cross(acc, sub);
    } else {
      acc.insert(acc.end(), sub.begin(), sub.end());
    }
  }
  return minimize_antichain(std::move(acc));
}

SpDiagram swapped(const SpDiagram& d) {
  using Kind = SpDiagram::Kind;
  if (d.kind() == Kind::component) return d;
  std::vector<SpDiagram> kids;
  kids.reserve(d.children().size());
  for (const auto& c : d.children()) kids.push_back(swapped(c));
  return d.kind() == Kind::series ? SpDiagram::parallel(std::move(kids))
                                  : SpDiagram::series(std::move(kids));
}

}  // namespace

std::vector<ComponentMask> SpDiagram::path_masks() const { return expand(*this, true); }
std::vector<ComponentMask> SpDiagram::cut_masks() const { return expand(*this, false); }

StructureFunction::StructureFunction(std::size_t components, SpDiagram diagram)
    : d_(components), diagram_(std::make_shared<const SpDiagram>(std::move(diagram))) {
  if (d_ == 0 || d_ > kMaxComponents) {
    throw Error(ErrorKind::invalid_argument, "component count must be in [1, 64]");
  }
  if ((diagram_->support() & ~full_mask(d_)) != 0) {
    throw Error(ErrorKind::invalid_argument, "diagram references a component id >= component count");
  }
}

StructureFunction::StructureFunction(std::size_t components,
                                     std::function<bool(ComponentMask)> predicate)
    : d_(components), predicate_(std::move(predicate)) {
  if (d_ == 0 || d_ > kMaxComponents) {
    throw Error(ErrorKind::invalid_argument, "component count must be in [1, 64]");
  }
}

bool StructureFunction::evaluate(ComponentMask working) const {
  working &= full_mask(d_);
  return diagram_ ? diagram_->evaluate(working) : predicate_(working);
}

StructureFunction StructureFunction::dual() const {
  if (diagram_) return StructureFunction(d_, swapped(*diagram_));
  const auto pred = predicate_;
  const ComponentMask all = full_mask(d_);
  return StructureFunction(d_, [pred, all](ComponentMask b) { return !pred(~b & all); });
}

CoherenceReport check_coherent(const StructureFunction& sf, std::size_t probes, std::uint64_t seed) {
  CoherenceReport rep;
  const std::size_t d = sf.component_count();
  const ComponentMask all = full_mask(d);
  if (!sf.evaluate(all)) {
    rep.coherent = false;
    rep.violations.emplace_back("system does not work with every component working");
  }
  if (sf.evaluate(0)) {
    rep.coherent = false;
    rep.violations.emplace_back("system works with every component broken");
  }
  auto flag = [&](ComponentMask lo, ComponentMask hi) {
    rep.coherent = false;
    if (rep.violations.size() < 16) {
      rep.violations.push_back("not monotone: phi(" + std::to_string(lo) + ") = 1 but phi(" +
                               std::to_string(hi) + ") = 0");
    }
  };
  if (d <= kMaxExhaustiveComponents) {
    rep.exhaustive = true;
    for (ComponentMask x = 0; x <= all; ++x) {
      if (!sf.evaluate(x)) continue;
      for (std::size_t j = 0; j < d; ++j) {
        const ComponentMask y = x | (ComponentMask{1} << j);
        if (y != x && !sf.evaluate(y)) flag(x, y);
      }
    }
  } else {
    rep.exhaustive = false;
    RandomStream rng(seed, 0);
    for (std::size_t p = 0; p < probes; ++p) {
      const ComponentMask x = rng.next_u64() & all;
      const ComponentMask y = x | (rng.next_u64() & all);
      if (sf.evaluate(x) && !sf.evaluate(y)) flag(x, y);
    }
  }
  return rep;
}

std::vector<ComponentMask> minimal_true_points(const StructureFunction& sf) {
  const std::size_t d = sf.component_count();
  if (d > kMaxExhaustiveComponents) {
    throw Error(ErrorKind::domain, "exhaustive enumeration limited to 20 components");
  }
  std::vector<ComponentMask> out;
  const ComponentMask all = full_mask(d);
  for (ComponentMask x = 0; x <= all; ++x) {
    if (!sf.evaluate(x)) continue;
    bool minimal = true;
    for (ComponentMask rest = x; rest != 0 && minimal; rest &= rest - 1) {
      const ComponentMask bit = rest & (~rest + 1);
      if (sf.evaluate(x & ~bit)) minimal = false;
    }
    if (minimal) out.push_back(x);
  }
  return out;
}

void canonical_sort(std::vector<ComponentSet>& sets) {
  std::sort(sets.begin(), sets.end(), [](const ComponentSet& a, const ComponentSet& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
}

namespace {

std::vector<ComponentSet> to_sets(const std::vector<ComponentMask>& masks) {
  std::vector<ComponentSet> out;
  out.reserve(masks.size());
  for (ComponentMask m : masks) out.push_back(to_set(m));
  canonical_sort(out);
  return out;
}

void require_coherent(const StructureFunction& sf) {
  if (sf.diagram() != nullptr) return;  // series/parallel compositions are always coherent
  const auto rep = check_coherent(sf);
  if (!rep.coherent) {
    throw Error(ErrorKind::domain, "structure function is not coherent: " + rep.violations.front());
  }
}

}  // namespace

std::vector<ComponentSet> enumerate_mps(const StructureFunction& sf) {
  require_coherent(sf);
  if (const auto* d = sf.diagram()) return to_sets(d->path_masks());
  return to_sets(minimal_true_points(sf));
}

std::vector<ComponentSet> enumerate_mcs(const StructureFunction& sf) {
  require_coherent(sf);
  if (const auto* d = sf.diagram()) return to_sets(d->cut_masks());
  return to_sets(minimal_true_points(sf.dual()));
}

CutPathDecomposition CutPathDecomposition::from_sets(std::size_t components,
                                                     std::vector<ComponentSet> mps,
                                                     std::vector<ComponentSet> mcs) {
  CutPathDecomposition d;
  d.components = components;
  canonical_sort(mps);
  canonical_sort(mcs);
  d.mps = std::move(mps);
  d.mcs = std::move(mcs);
  for (const auto& s : d.mps) d.mps_masks.push_back(to_mask(s));
  for (const auto& s : d.mcs) {
    if (s.empty()) throw Error(ErrorKind::decomposition, "empty minimal cut set");
    d.mcs_masks.push_back(to_mask(s));
    d.mcs_sizes.push_back(static_cast<double>(s.size()));
  }
  return d;
}

CutPathDecomposition decompose(const StructureFunction& sf) {
  return CutPathDecomposition::from_sets(sf.component_count(), enumerate_mps(sf), enumerate_mcs(sf));
}

std::size_t damaged_mps_count(const CutPathDecomposition& decomp, ComponentMask broken) {
  std::size_t n = 0;
  for (ComponentMask m : decomp.mps_masks) n += (m & broken) != 0;
  return n;
}

void mcs_broken_fractions(const CutPathDecomposition& decomp, ComponentMask broken,
                          std::vector<double>& out) {
  out.resize(decomp.mcs_masks.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::popcount(decomp.mcs_masks[i] & broken) / decomp.mcs_sizes[i];
  }
  std::stable_sort(out.begin(), out.end(), std::greater<>());
}

std::vector<double> mcs_broken_fractions(const CutPathDecomposition& decomp, ComponentMask broken) {
  std::vector<double> out;
  mcs_broken_fractions(decomp, broken, out);
  return out;
}

bool failure_mode_test(const CutPathDecomposition& decomp, ComponentMask broken) {
  const bool all_paths_damaged = damaged_mps_count(decomp, broken) == decomp.mps_masks.size();
  const bool some_cut_broken = std::any_of(decomp.mcs_masks.begin(), decomp.mcs_masks.end(),
                                           [broken](ComponentMask m) { return (m & broken) == m; });
  if (all_paths_damaged != some_cut_broken) {
    throw Error(ErrorKind::decomposition, "MPS and MCS criteria disagree on failure mode");
  }
  return all_paths_damaged;
}

}  // namespace pdmpis
