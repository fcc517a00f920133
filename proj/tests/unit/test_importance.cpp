#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "pdmpis/error.hpp"
#include "pdmpis/importance.hpp"
#include "pdmpis/numeric.hpp"
#include "pdmpis/optimize.hpp"
#include "pdmpis/rng.hpp"
#include "pdmpis/simulate.hpp"

using namespace pdmpis;
using Catch::Approx;

TEST_CASE("packet expansion", "[importance]") {
  const std::vector<double> r{1.0, 2.0};
  CHECK(expand_theta(r, 2, 3) == std::vector<double>{1.0, 1.0, 2.0});
  CHECK(expand_theta(r, 1, 2) == r);
  CHECK(contract_theta(std::vector<double>{1.0, 1.0, 2.0}, 2) == r);
  CHECK(reduce_gradient(std::vector<double>{1.0, 2.0, 3.0}, 2) == std::vector<double>{3.0, 3.0});
  CHECK(reduced_dimension(69, 9) == 8);
  CHECK(reduced_dimension(15, 2) == 8);
  CHECK(reduced_dimension(8, 1) == 8);
  CHECK_THROWS_AS(expand_theta(r, 2, 5), Error);
}

TEST_CASE("family parsing and dimensions", "[importance]") {
  CHECK(parse_family("mcs") == Family::mcs);
  CHECK(to_string(Family::bc) == "bc");
  try {
    (void)parse_family("xyz");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
  }
  const auto m = testutil::load("sfp_standard");
  const auto& d = m.model->decomposition();
  CHECK(theta_dimension(Family::bc, d) == 15);
  CHECK(theta_dimension(Family::mps, d) == 8);
  CHECK(theta_dimension(Family::mcs, d) == 69);

  const auto t = make_theta(Family::mcs, d, 9);
  CHECK(t.reduced.size() == 8);
  CHECK(t.hi[0] == Approx(3.0 / std::sqrt(8.0)));
  CHECK(t.lo[0] == 0.0);
}

TEST_CASE("importance function values", "[importance]") {
  const auto s = testutil::load("series5");
  const auto& d = s.model->decomposition();
  const ImportanceFunction bc(Family::bc, d, std::vector<double>(5, 0.8));
  CHECK(bc.log_value(0) == 0.0);
  CHECK(bc.log_value(0b1) == Approx(0.64));
  CHECK(bc.log_value(0b101) == Approx(2.56));

  // On a series system every MCS is a singleton, so MCS reduces to BC.
  const ImportanceFunction mcs(Family::mcs, d, std::vector<double>(5, 0.8));
  for (ComponentMask b = 0; b < 32; ++b) CHECK(mcs.log_value(b) == Approx(bc.log_value(b)));

  const ImportanceFunction g(Family::bc, d, std::vector<double>(5, 0.4));
  std::vector<double> grad(5);
  g.grad_log_value(0b11, grad);
  CHECK(grad[0] == Approx(1.6));
  CHECK(grad[1] == Approx(1.6));
  CHECK(grad[2] == 0.0);
  CHECK(grad[4] == 0.0);
}

TEST_CASE("importance gradient matches finite differences", "[importance][property]") {
  const auto m = testutil::load("sfp_standard");
  const auto& d = m.model->decomposition();
  RandomStream rng(4, 0);
  for (Family f : {Family::bc, Family::mps, Family::mcs}) {
    const std::size_t n = theta_dimension(f, d);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> th(n);
      for (auto& x : th) x = rng.uniform();
      const ComponentMask broken = rng.next_u64() & full_mask(15);
      std::vector<double> grad(n);
      ImportanceFunction(f, d, th).grad_log_value(broken, grad);
      const auto fd = finite_diff_grad(
          [&](std::span<const double> x) {
            return ImportanceFunction(f, d, {x.begin(), x.end()}).log_value(broken);
          },
          th);
      for (std::size_t i = 0; i < n; ++i) CHECK(grad[i] == Approx(fd[i]).margin(1e-6));
    }
  }
}

TEST_CASE("importance function is monotone in the broken set", "[importance][property]") {
  const auto m = testutil::load("sfp_standard");
  const auto& d = m.model->decomposition();
  RandomStream rng(9, 0);
  for (Family f : {Family::bc, Family::mps, Family::mcs}) {
    std::vector<double> th(theta_dimension(f, d));
    for (auto& x : th) x = rng.uniform();
    const ImportanceFunction iff(f, d, th);
    for (int i = 0; i < 2000; ++i) {
      const ComponentMask a = rng.next_u64() & full_mask(15);
      const ComponentMask b = a | (rng.next_u64() & full_mask(15));
      CHECK(iff.log_value(a) <= iff.log_value(b) + 1e-12);
    }
  }
}

TEST_CASE("biased kernel", "[importance]") {
  // Two parallel components with equal rates; component 0 already broken.
  const auto m = testutil::parallel({1.0, 1.0}, {1.0, 1.0}, 100.0, 10.0, 10.0);
  const AffineLaw nominal(*m);
  const ImportanceFunction iff(Family::bc, m->decomposition(), {1.0, 0.0});
  auto z = m->initial_state();
  z.mode[0] = 0;

  CHECK(if_value(iff, *m, z) == Approx(1.0));
  // Nominal kernel: 1/2 to repair (U = 1), 1/2 to break the other (U = e).
  CHECK(if_minus(iff, nominal, z) == Approx(std::log(0.5 + 0.5 * std::exp(1.0))));

  const auto k = biased_kernel(iff, nominal, z);
  REQUIRE(k.size() == 2);
  double total = 0.0;
  for (const auto& p : k) {
    total += p.mass;
    if (p.component == 1) CHECK(p.mass == Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)));
  }
  CHECK(total == Approx(1.0));

  const BiasedLaw law(*m, iff);
  CHECK(law.intensity(z) == Approx(biased_intensity(iff, nominal, z)));
  for (const auto& p : k) CHECK(law.kernel_density(z, p.state) == Approx(p.mass));

  // One working component, BC theta 1: breaking it gives log U = 1.
  const auto one = testutil::one_component(2.0, 1.0, 10.0, 1.0);
  const ImportanceFunction i1(Family::bc, one->decomposition(), {1.0});
  CHECK(if_minus(i1, AffineLaw(*one), one->initial_state()) == Approx(1.0));
}

TEST_CASE("biased kernels normalise on the pool", "[importance][property]") {
  const auto m = testutil::load("sfp_standard");
  const auto& model = *m.model;
  const AffineLaw nominal(model);
  RandomStream rng(6, 0);
  for (Family f : {Family::bc, Family::mps, Family::mcs}) {
    std::vector<double> th(theta_dimension(f, model.decomposition()));
    for (auto& x : th) x = rng.uniform();
    const ImportanceFunction iff(f, model.decomposition(), th);
    const BiasedLaw law(model, iff);
    for (int i = 0; i < 3400; ++i) {
      auto z = model.initial_state();
      for (std::size_t j = 0; j < 15; ++j) {
        if (rng.uniform() < 0.2) z.mode[j] = -1;
      }
      model.reconfigure(z.mode);
      z.position[0] = 15.0 + 85.0 * rng.uniform();
      double total = 0.0;
      for (const auto& p : biased_kernel(iff, nominal, z)) total += p.mass;
      CHECK(total == Approx(1.0).epsilon(1e-12));
      CHECK(law.intensity(z) == Approx(biased_intensity(iff, nominal, z)).epsilon(1e-12));
    }
  }
}

TEST_CASE("theta zero recovers the nominal law", "[importance]") {
  for (const char* name : {"series5", "parallel5", "sfp_standard"}) {
    const auto m = testutil::load(name);
    const auto& model = *m.model;
    const AffineLaw nominal(model);
    const BiasedLaw biased(
        model, ImportanceFunction(Family::mps, model.decomposition(),
                                  std::vector<double>(theta_dimension(Family::mps,
                                                                      model.decomposition()),
                                                      0.0)));
    // Inflated rates so that paths have jumps.
    const std::string n(name);
    const double factor = n == "series5" ? 1e6 : n == "parallel5" ? 10.0 : 100.0;
    RateTable rates = model.nominal_rates();
    for (std::size_t j = 0; j < model.component_count(); ++j) {
      for (std::int8_t st : model.status_alphabet()) rates = rates.scaled(j, st, factor);
    }
    const AffineLaw fast(model, rates);
    const BiasedLaw fast_biased(model, rates,
                                ImportanceFunction(Family::bc, model.decomposition(),
                                                   std::vector<double>(model.component_count(), 0.0)));
    for (std::uint64_t i = 0; i < 100; ++i) {
      RandomStream a(2, i), b(2, i);
      const auto ta = simulate_trajectory(model, fast, a);
      const auto tb = simulate_trajectory(model, fast_biased, b);
      REQUIRE(ta.jumps.size() == tb.jumps.size());
      CHECK(ta.failed == tb.failed);
      CHECK(std::abs(log_density(ta, fast) - log_density(tb, fast_biased)) <= 1e-12);
      CHECK(std::abs(log_density(ta, nominal) - log_density(ta, biased)) <= 1e-12);
    }
  }
}

TEST_CASE("log U grows with every theta coordinate", "[importance][property]") {
  const auto m = testutil::load("sfp_standard");
  const auto& d = m.model->decomposition();
  RandomStream rng(10, 0);
  for (Family f : {Family::bc, Family::mps, Family::mcs}) {
    const std::size_t n = theta_dimension(f, d);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<double> th(n);
      for (auto& x : th) x = rng.uniform();
      const ComponentMask broken = rng.next_u64() & full_mask(15);
      const double before = ImportanceFunction(f, d, th).log_value(broken);
      th[rng.next_u64() % n] += 0.1 * rng.uniform();
      CHECK(ImportanceFunction(f, d, th).log_value(broken) >= before);
    }
  }
}

TEST_CASE("BC ratio grows with the broken count", "[importance]") {
  const auto m = testutil::parallel(std::vector<double>(5, 1.0), std::vector<double>(5, 1.0),
                                    100.0, 10.0, 10.0);
  const AffineLaw nominal(*m);
  const ImportanceFunction iff(Family::bc, m->decomposition(), std::vector<double>(5, 1.0));
  double prev = -kInf;
  for (std::size_t beta = 0; beta < 5; ++beta) {
    auto z = m->initial_state();
    for (std::size_t j = 0; j < beta; ++j) z.mode[j] = 0;
    const double ratio = if_minus(iff, nominal, z) - if_value(iff, *m, z);
    CHECK(ratio > prev);
    prev = ratio;
  }
}

TEST_CASE("log U stays within the box bounds", "[importance][property]") {
  for (const char* name : {"series5", "parallel5", "sfp_standard"}) {
    const auto m = testutil::load(name);
    const auto& d = m.model->decomposition();
    const std::size_t dc = m.model->component_count();
    RandomStream rng(11, 0);
    for (Family f : {Family::bc, Family::mps, Family::mcs}) {
      const auto t = make_theta(f, d, 1);
      double upper = 0.0;
      for (double h : t.hi) upper += h;
      upper *= upper;
      for (int i = 0; i < 500; ++i) {
        std::vector<double> th(t.full_dim);
        for (std::size_t k = 0; k < th.size(); ++k) th[k] = t.hi[k] * rng.uniform();
        const double v = ImportanceFunction(f, d, th).log_value(rng.next_u64() & full_mask(dc));
        CHECK(v >= 0.0);
        CHECK(v <= upper);
      }
    }
  }
}
