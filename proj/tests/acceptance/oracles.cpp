#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

using pdmpis::SpDiagram;

namespace {

SpDiagram grow(pdmpis::RandomStream& rng, std::vector<std::size_t>& ids, std::size_t lo,
               std::size_t hi, bool series) {
  if (hi - lo == 1) return SpDiagram::component(ids[lo]);
  const std::size_t parts = std::min<std::size_t>(hi - lo, 2 + rng.next_u64() % 3);
  std::vector<std::size_t> cuts{lo, hi};
  while (cuts.size() < parts + 1) {
    const std::size_t c = lo + 1 + rng.next_u64() % (hi - lo - 1);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<SpDiagram> kids;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    kids.push_back(grow(rng, ids, cuts[i], cuts[i + 1], !series));
  }
  return series ? SpDiagram::series(std::move(kids)) : SpDiagram::parallel(std::move(kids));
}

// Minimal elements of an up-closed family given by its indicator table: a
// member is minimal iff dropping any single element leaves the family.
std::vector<std::uint64_t> minimal(const std::vector<char>& member, std::size_t d) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t a = 0; a < member.size(); ++a) {
    if (!member[a]) continue;
    bool keep = true;
    for (std::size_t j = 0; j < d && keep; ++j) {
      if (((a >> j) & 1u) && member[a & ~(std::uint64_t{1} << j)]) keep = false;
    }
    if (keep) out.push_back(a);
  }
  return out;
}

}  // namespace

SpDiagram random_diagram(pdmpis::RandomStream& rng, std::size_t d) {
  std::vector<std::size_t> ids(d);
  for (std::size_t i = 0; i < d; ++i) ids[i] = i;
  for (std::size_t i = d; i > 1; --i) std::swap(ids[i - 1], ids[rng.next_u64() % i]);
  // Occasionally repeat a component so that shared supports are exercised.
  if (d > 2 && rng.uniform() < 0.3) ids.push_back(ids[rng.next_u64() % d]);
  return grow(rng, ids, 0, ids.size(), rng.uniform() < 0.5);
}

bool works(const SpDiagram& diagram, std::uint64_t working) {
  switch (diagram.kind()) {
    case SpDiagram::Kind::component:
      return (working >> diagram.id()) & 1u;
    case SpDiagram::Kind::series:
      for (const auto& c : diagram.children()) {
        if (!works(c, working)) return false;
      }
      return true;
    case SpDiagram::Kind::parallel:
      for (const auto& c : diagram.children()) {
        if (works(c, working)) return true;
      }
      return false;
  }
  return false;
}

std::vector<std::uint64_t> brute_paths(const SpDiagram& diagram, std::size_t d) {
  std::vector<char> member(std::size_t{1} << d);
  for (std::uint64_t w = 0; w < member.size(); ++w) member[w] = works(diagram, w);
  return minimal(member, d);
}

std::vector<std::uint64_t> brute_cuts(const SpDiagram& diagram, std::size_t d) {
  const std::uint64_t all = (std::uint64_t{1} << d) - 1;
  std::vector<char> member(std::size_t{1} << d);
  for (std::uint64_t b = 0; b <= all; ++b) member[b] = !works(diagram, all & ~b);
  return minimal(member, d);
}

double ks_exponential(std::vector<double> xs, double rate) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = 1.0 - std::exp(-rate * xs[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d * std::sqrt(n);
}

std::pair<double, double> rk4_pool(const pdmpis::SfpModel& m, const pdmpis::SystemState& z,
                                   double h) {
  const auto& k = m.config().constants;
  const bool failed = m.in_failure_modes(z.mode);
  const double boil = k.boiling_temperature;
  const double drop = m.level_rate();
  auto rhs = [&](double temp, double level, bool boiling) -> std::pair<double, double> {
    const double mass_heat = k.density * k.heat_capacity * k.area * level;
    if (!failed) {
      return {(k.residual_power -
               k.density * k.heat_capacity * k.flow_rate * (temp - k.source_temperature)) /
                  mass_heat,
              0.0};
    }
    if (!boiling) return {k.residual_power / mass_heat, 0.0};
    return {0.0, -drop};
  };
  auto step = [&](double temp, double level, bool boiling, double dt) {
    auto [a1, b1] = rhs(temp, level, boiling);
    auto [a2, b2] = rhs(temp + 0.5 * dt * a1, level + 0.5 * dt * b1, boiling);
    auto [a3, b3] = rhs(temp + 0.5 * dt * a2, level + 0.5 * dt * b2, boiling);
    auto [a4, b4] = rhs(temp + dt * a3, level + dt * b3, boiling);
    return std::pair{temp + dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4),
                     level + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)};
  };
  double temp = z.position[0], level = z.position[1], t = 0.0;
  bool boiling = failed && temp >= boil;
  while (t < h) {
    double s = std::min(0.01, h - t);
    auto [nt, nl] = step(temp, level, boiling, s);
    if (failed && !boiling && nt >= boil) {
      double lo = 0.0, hi = s;
      for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        (step(temp, level, false, mid).first >= boil ? hi : lo) = mid;
      }
      s = hi;
      level = step(temp, level, false, s).second;
      temp = boil;
      boiling = true;
    } else {
      temp = nt;
      level = nl;
    }
    t += s;
  }
  return {temp, level};
}

double z_score(double a, double sigma_a, double n_a, double b, double sigma_b, double n_b) {
  const double se = std::sqrt(sigma_a * sigma_a / n_a + sigma_b * sigma_b / n_b);
  return se > 0.0 ? std::abs(a - b) / se : (a == b ? 0.0 : INFINITY);
}

}  // namespace oracle
