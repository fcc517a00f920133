#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

#include "helpers.hpp"
#include "pdmpis/error.hpp"
#include "pdmpis/law.hpp"
#include "pdmpis/numeric.hpp"
#include "pdmpis/simulate.hpp"

using namespace pdmpis;
using Catch::Approx;

namespace {

template <typename F>
ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::config;
}

// Kolmogorov statistic sqrt(n) * D against an exponential cdf.
double ks_exponential(std::vector<double> xs, double rate) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = -std::expm1(-rate * xs[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d * std::sqrt(n);
}

FunctionLaw constant_law(const SystemModel& m, double lambda, double majorant) {
  return FunctionLaw(
      m, [lambda](const SystemState&, std::span<double> out) { out[0] = lambda; },
      [majorant](const SystemState&, double) { return majorant; });
}

// Pool state with G0, G3 and S1 broken: every line is down.
SystemState pool_failed(const SfpModel& m) {
  SystemState z = m.initial_state();
  for (std::size_t j : {0, 3, 4}) z.mode[j] = -1;
  m.reconfigure(z.mode);
  return z;
}

// Path of the one-component model with spontaneous jumps at the given times.
Trajectory build_path(const SystemModel& m, const std::vector<double>& times) {
  Trajectory t;
  t.initial_state = m.initial_state();
  SystemState z = t.initial_state;
  double last = 0.0;
  for (double s : times) {
    SystemState pre = m.flow(z, s - last);
    SystemState post = m.jump_target(pre, 0);
    t.jumps.push_back({s - last, JumpKind::spontaneous, pre, post, std::size_t{0}});
    z = post;
    last = s;
  }
  t.final_duration = m.horizon() - last;
  t.final_state = m.flow(z, t.final_duration);
  return t;
}

}  // namespace

TEST_CASE("grace-period flow", "[pdmp][flow]") {
  const auto m = testutil::series({1e-3, 1e-3}, {1e-2, 1e-2});
  const auto z = m->initial_state();
  const auto a = flow_evaluate(*m, z, 10.0);
  CHECK(a.position == std::vector<double>{0.0, 0.0, 10.0});
  CHECK(a.mode == z.mode);

  auto broken = z;
  broken.mode[1] = 0;
  const auto b = flow_evaluate(*m, broken, 4.0);
  CHECK(b.position == std::vector<double>{4.0, 4.0, 4.0});

  CHECK(std::isinf(m->boundary_time(z)));
  CHECK(m->boundary_time(broken) == 50.0);
  broken.position = {70.0, 0.0, 100.0};
  CHECK(m->boundary_time(broken) == Approx(5.0));
}

TEST_CASE("flow argument checks", "[pdmp][flow]") {
  const auto m = testutil::series({1e-3}, {1e-2});
  const auto z = m->initial_state();
  CHECK(error_kind([&] { (void)flow_evaluate(*m, z, -1.0); }) == ErrorKind::invalid_argument);
  auto bad = z;
  bad.mode[0] = 5;
  CHECK(error_kind([&] { (void)flow_evaluate(*m, bad, 1.0); }) == ErrorKind::invalid_state);
  bad = z;
  bad.position[2] = 2000.0;
  CHECK(error_kind([&] { (void)flow_evaluate(*m, bad, 1.0); }) == ErrorKind::invalid_state);
}

TEST_CASE("pool flow", "[pdmp][flow][sfp]") {
  const auto lm = testutil::load("sfp_standard");
  const auto& m = testutil::as_sfp(lm);
  const auto z0 = m.initial_state();
  CHECK(z0.position == std::vector<double>{15.0, 19.0, 0.0});

  CHECK(m.cooled_equilibrium() == Approx(24.25).margin(0.01));
  const auto cooled = m.flow(z0, 1000.0);
  CHECK(cooled.position[0] == Approx(m.cooled_equilibrium()).epsilon(1e-12));
  CHECK(cooled.position[1] == 19.0);

  const auto zf = pool_failed(m);
  REQUIRE(m.in_failure_modes(zf.mode));
  const auto one = m.flow(zf, 1.0);
  CHECK(one.position[0] - 15.0 == Approx(3.48).margin(0.005));
  CHECK(one.position[0] - 15.0 == Approx(m.heating_rate(19.0)).epsilon(1e-12));

  const double tb = m.time_to_boiling(zf);
  CHECK(tb == Approx(85.0 / m.heating_rate(19.0)));
  CHECK(m.flow(zf, tb).position[0] == Approx(100.0).margin(1e-9));
  CHECK(m.boundary_time(zf) == Approx(tb + 3.0 / m.level_rate()).epsilon(1e-12));
  CHECK(std::isinf(m.boundary_time(z0)));

  // 99 degrees: one degree to boiling.
  auto hot = zf;
  hot.position[0] = 99.0;
  CHECK(m.time_to_boiling(hot) == Approx(1.0 / m.heating_rate(19.0)));

  SECTION("level drop with both formulas") {
    for (auto f : {LevelRateFormula::as_printed, LevelRateFormula::latent_heat}) {
      SfpConfig c = m.config();
      c.level_rate_formula = f;
      const auto p = build_sfp(c);
      const double expected = f == LevelRateFormula::as_printed ? 2.928e-5 : 0.1224;
      CHECK(p->level_rate() == Approx(expected).epsilon(2e-3));
      const auto after = p->flow(zf, tb + 10.0);
      CHECK(after.position[0] == 100.0);
      CHECK(after.position[1] == Approx(19.0 - 10.0 * p->level_rate()).epsilon(1e-12));
    }
  }
}

TEST_CASE("flow semigroup", "[pdmp][flow][property]") {
  const auto lm = testutil::load("sfp_standard");
  const auto& m = testutil::as_sfp(lm);
  const auto g = testutil::series({1e-3, 1e-3}, {1e-2, 1e-2});
  RandomStream rng(5, 0);
  for (int i = 0; i < 500; ++i) {
    const double a = 40.0 * rng.uniform(), b = 40.0 * rng.uniform();
    for (const auto& z : {m.initial_state(), pool_failed(m)}) {
      const auto lhs = m.flow(m.flow(z, a), b);
      const auto rhs = m.flow(z, a + b);
      for (std::size_t k = 0; k < 3; ++k) CHECK(lhs.position[k] == Approx(rhs.position[k]));
    }
    auto gz = g->initial_state();
    gz.mode[0] = 0;
    CHECK(g->flow(g->flow(gz, a), b).position == g->flow(gz, a + b).position);
  }
}

TEST_CASE("thinning without rejection is the exponential draw", "[pdmp][thinning]") {
  const auto m = testutil::one_component(1.0, 1.0, 1e6, 1.0);
  const auto law = constant_law(*m, 1.0, 1.0);
  const auto z = m->initial_state();
  std::vector<double> xs;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    RandomStream a(11, i), b(11, i);
    const auto s = sample_jump_time(*m, law, z, 1.0, 1e9, a);
    REQUIRE(s.kind == SegmentEnd::spontaneous);
    CHECK(s.time == b.exponential(1.0));
    xs.push_back(s.time);
  }
  CHECK(ks_exponential(xs, 1.0) < 1.628);
}

TEST_CASE("thinning with a loose majorant", "[pdmp][thinning]") {
  const auto m = testutil::one_component(0.5, 0.5, 1e6, 1.0);
  const auto law = constant_law(*m, 0.5, 1.0);
  const auto z = m->initial_state();
  std::vector<double> xs;
  double sum = 0.0;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    RandomStream r(12, i);
    const auto s = sample_jump_time(*m, law, z, 1.0, 1e9, r);
    xs.push_back(s.time);
    sum += s.time;
  }
  CHECK(sum / 20000.0 == Approx(2.0).margin(5.0 * 2.0 / std::sqrt(20000.0)));
  CHECK(ks_exponential(xs, 0.5) < 1.628);
}

TEST_CASE("segment limits and majorant violation", "[pdmp][thinning]") {
  const auto m = testutil::one_component(0.0, 0.0, 1.0, 0.1, true);
  const AffineLaw law(*m);
  RandomStream r(1, 0);
  const auto s = sample_jump_time(*m, law, m->initial_state(), 0.0, 1.0, r);
  CHECK(s.kind == SegmentEnd::boundary);
  CHECK(s.time == Approx(0.1));

  // Boundary and horizon coincide: the boundary wins.
  const auto tie = testutil::one_component(0.0, 0.0, 1.0, 1.0, true);
  const auto t = sample_jump_time(*tie, AffineLaw(*tie), tie->initial_state(), 0.0, 1.0, r);
  CHECK(t.kind == SegmentEnd::boundary);
  CHECK(t.time == 1.0);

  const auto w = testutil::one_component(1.0, 1.0, 100.0, 1.0);
  const auto under = constant_law(*w, 1.0, 0.5);
  CHECK(error_kind([&] {
          RandomStream q(1, 0);
          (void)sample_jump_time(*w, under, w->initial_state(), 0.5, 100.0, q);
        }) == ErrorKind::majorant_violation);
}

TEST_CASE("post-jump kernel frequencies", "[pdmp][kernel]") {
  const auto m = testutil::series({1.0, 3.0}, {1.0, 1.0}, 100.0, 10.0, 10.0);
  const AffineLaw law(*m);
  const auto z = m->initial_state();
  const int n = 100000;
  int first = 0;
  for (int i = 0; i < n; ++i) {
    RandomStream r(21, i);
    auto [post, j] = sample_post_jump(law, z, r);
    CHECK(post.mode[j] == 0);
    first += j == 0;
  }
  const double e0 = n * 0.25, e1 = n * 0.75;
  const double chi2 = (first - e0) * (first - e0) / e0 + (n - first - e1) * (n - first - e1) / e1;
  CHECK(chi2 < 6.635);

  CHECK(law.kernel_density(z, m->jump_target(z, 1)) == Approx(0.75));
  const auto support = law.kernel_support(z);
  double total = 0.0;
  for (const auto& p : support) total += p.mass;
  CHECK(total == Approx(1.0));

  const auto single = testutil::one_component(2.0, 1.0, 10.0, 1.0);
  RandomStream r(1, 1);
  auto [post, j] = sample_post_jump(AffineLaw(*single), single->initial_state(), r);
  CHECK(j == 0);
  CHECK(post.mode[0] == 0);
}

TEST_CASE("simulation edge cases", "[pdmp][simulate]") {
  const auto quiet = testutil::one_component(0.0, 0.0, 10.0, 1.0);
  RandomStream r(1, 0);
  const auto t = simulate_trajectory(*quiet, AffineLaw(*quiet), r);
  CHECK(t.jumps.empty());
  CHECK_FALSE(t.failed);
  CHECK(t.final_duration == 10.0);
  CHECK(t.final_state.position[2] == 10.0);

  const auto doomed = testutil::one_component(0.0, 0.0, 10.0, 0.0, true);
  const auto d = simulate_trajectory(*doomed, AffineLaw(*doomed), r);
  CHECK(d.failed);
  CHECK(d.final_duration == 0.0);

  const auto busy = testutil::one_component(50.0, 50.0, 10.0, 1.0);
  SimulationOptions opts;
  opts.max_jumps = 5;
  CHECK(error_kind([&] { (void)simulate_trajectory(*busy, AffineLaw(*busy), r, opts); }) ==
        ErrorKind::runaway_simulation);
}

TEST_CASE("pool trajectories stay in the state space", "[pdmp][simulate][sfp]") {
  const auto lm = testutil::load("sfp_standard");
  const auto& m = *lm.model;
  // Rates scaled up so paths actually visit failure modes.
  RateTable rates = m.nominal_rates();
  for (std::size_t j = 0; j < m.component_count(); ++j) {
    for (std::int8_t s : {0, 1}) rates = rates.scaled(j, s, 300.0);
  }
  const AffineLaw law(m, rates);
  int failed = 0;
  for (std::uint64_t i = 0; i < 300; ++i) {
    RandomStream r(3, i);
    const auto t = simulate_trajectory(m, law, r);
    failed += t.failed;
    double elapsed = 0.0;
    for (const auto& j : t.jumps) {
      elapsed += j.waiting_time;
      m.validate(j.pre_jump);
      m.validate(j.post_jump);
      CHECK(j.pre_jump.position[2] == Approx(elapsed));
      REQUIRE(j.component);
      // Exactly one broken flag changes.
      CHECK(std::popcount(m.broken_mask(j.pre_jump.mode) ^ m.broken_mask(j.post_jump.mode)) == 1);
    }
    m.validate(t.final_state);
    CHECK(t.final_state.position[2] <= m.horizon());
    if (t.failed) CHECK(t.final_state.position[1] == Approx(16.0));
    else CHECK(t.final_state.position[2] == Approx(m.horizon()));
  }
  CHECK(failed > 0);
}

TEST_CASE("log density on hand-built paths", "[pdmp][density]") {
  // Working component, rate 1, horizon 1, no jump: density e^-1.
  const auto m = testutil::one_component(1.0, 0.4, 1.0, 1.0);
  const AffineLaw law(*m);
  CHECK(log_density(build_path(*m, {}), law) == Approx(-1.0).epsilon(1e-14));
  // Failure at 0.5 (rate 1), then 0.5 h broken at repair rate 0.4.
  CHECK(log_density(build_path(*m, {0.5}), law) == Approx(-0.7).epsilon(1e-14));

  const auto m2 = testutil::one_component(2.0, 0.4, 1.0, 1.0);
  CHECK(log_density(build_path(*m2, {0.5}), AffineLaw(*m2)) ==
        Approx(std::log(2.0) - 1.0 - 0.2).epsilon(1e-14));
}

TEST_CASE("log density matches an independent sum", "[pdmp][density][property]") {
  const std::vector<double> fail{0.02, 0.05}, rep{0.3, 0.2};
  const auto m = testutil::series(fail, rep, 100.0, 20.0, 10.0);
  const AffineLaw law(*m);
  for (std::uint64_t i = 0; i < 300; ++i) {
    RandomStream r(8, i);
    const auto t = simulate_trajectory(*m, law, r);
    double expected = 0.0;
    auto seg = [&](const SystemState& z, double dur) {
      for (std::size_t j = 0; j < 2; ++j) expected -= (z.mode[j] ? fail[j] : rep[j]) * dur;
    };
    const SystemState* z = &t.initial_state;
    for (const auto& j : t.jumps) {
      seg(*z, j.waiting_time);
      expected += std::log(j.pre_jump.mode[*j.component] ? fail[*j.component] : rep[*j.component]);
      z = &j.post_jump;
    }
    seg(*z, t.final_duration);
    CHECK(log_density(t, law) == Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("path densities integrate to one", "[pdmp][density]") {
  const double a = 0.05, b = 0.08;
  const auto m = testutil::one_component(a, b, 1.0, 1.0);
  const AffineLaw law(*m);
  auto dens = [&](std::vector<double> ts) { return std::exp(log_density(build_path(*m, ts), law)); };
  const double tol = 1e-11;
  const double p0 = dens({});
  const double p1 = adaptive_simpson([&](double s) { return dens({s}); }, 0.0, 1.0, tol);
  const double p2 = adaptive_simpson(
      [&](double s) {
        return adaptive_simpson([&](double u) { return dens({s, u}); }, s, 1.0, tol);
      },
      0.0, 1.0, tol);
  const double p3 = adaptive_simpson(
      [&](double s) {
        return adaptive_simpson(
            [&](double u) {
              return adaptive_simpson([&](double v) { return dens({s, u, v}); }, u, 1.0, tol);
            },
            s, 1.0, tol);
      },
      0.0, 1.0, tol);
  CHECK(p0 == Approx(std::exp(-a)));
  CHECK(p1 == Approx(a * std::exp(-b) * -std::expm1(b - a) / (a - b)).epsilon(1e-9));
  const double total = p0 + p1 + p2 + p3;
  // Paths with four or more jumps carry less than (0.08)^4 / 24.
  CHECK(total <= 1.0 + 1e-9);
  CHECK(total >= 1.0 - 2e-6);
}

TEST_CASE("assumption probes", "[pdmp][validate]") {
  const auto lm = testutil::load("series5");
  const AffineLaw law(*lm.model);
  const auto rep = validate_assumptions(*lm.model, law, 200);
  CHECK(rep.ok());
  CHECK(rep.lambda_min > 0.0);
  CHECK(rep.kernel_max <= 1.0);

  const auto z = testutil::series({0.1, 0.0}, {0.1, 0.1}, 10.0, 1.0, 1.0);
  const auto bad = validate_assumptions(*z, AffineLaw(*z), 50);
  CHECK_FALSE(bad.ok());
  CHECK(bad.zero_rate_on_support);
}
