#include "pdmpis/estimation.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "pdmpis/error.hpp"
#include "pdmpis/numeric.hpp"
#include "pdmpis/rng.hpp"
#include "pdmpis/simulate.hpp"

namespace pdmpis {

namespace {

using Buffer = std::array<double, kMaxComponents>;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

bool EstimationReport::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

// ---------------------------------------------------------------- digests

std::vector<SegmentDigest> digest_segments(const SystemModel& model, const Trajectory& traj) {
  std::vector<SegmentDigest> out;
  out.reserve(traj.jumps.size() + 1);
  auto segment = [&](const SystemState& start, double duration, const SystemState& end,
                     std::int32_t component) {
    SegmentDigest s;
    s.mode = start.mode;
    s.broken = model.broken_mask(start.mode);
    s.duration = duration;
    s.covariate_integral = duration > 0.0 ? model.covariate_integral(start, duration) : 0.0;
    s.covariate_end = model.covariate(end);
    s.component = component;
    out.push_back(std::move(s));
  };
  const SystemState* start = &traj.initial_state;
  for (const auto& jump : traj.jumps) {
    const std::int32_t c = jump.kind == JumpKind::spontaneous && jump.component
                               ? static_cast<std::int32_t>(*jump.component)
                               : -1;
    segment(*start, jump.waiting_time, jump.pre_jump, c);
    start = &jump.post_jump;
  }
  segment(*start, traj.final_duration, traj.final_state, -1);
  return out;
}

double digest_log_density(std::span<const SegmentDigest> segments, const AffineLaw& law) {
  const std::size_t d = law.model().component_count();
  CompensatedSum total;
  Buffer buf{};
  const std::span<double> view(buf.data(), d);
  for (const auto& s : segments) {
    law.integrals_given(s.mode, s.duration, s.covariate_integral, view);
    CompensatedSum integral;
    for (std::size_t j = 0; j < d; ++j) integral += buf[j];
    total += -integral.value();
    if (s.component >= 0) {
      law.rates_at(s.mode, s.covariate_end, view);
      total += std::log(buf[static_cast<std::size_t>(s.component)]);
    }
  }
  return total.value();
}

WeightedSample make_sample(const SystemModel& model, const Trajectory& traj,
                           const AffineLaw& nominal, const AffineLaw& proposal,
                           std::size_t iteration) {
  WeightedSample s;
  s.segments = digest_segments(model, traj);
  s.failed = traj.failed;
  s.n_jumps = traj.n_jumps();
  s.log_nominal = digest_log_density(s.segments, nominal);
  s.log_proposal = &nominal == &proposal ? s.log_nominal : digest_log_density(s.segments, proposal);
  s.iteration = iteration;
  return s;
}

// ------------------------------------------------------------- estimators

namespace {

double failed_shift(std::span<const double> lw, std::span<const std::uint8_t> failed) {
  double shift = -kInf;
  for (std::size_t i = 0; i < lw.size(); ++i) {
    if (failed[i] && std::isfinite(lw[i])) shift = std::max(shift, lw[i]);
  }
  return shift;
}

void check_lengths(std::span<const double> lw, std::span<const std::uint8_t> failed) {
  if (lw.size() != failed.size()) {
    throw Error(ErrorKind::invalid_argument, "log-weights and failure flags differ in length");
  }
}

void unpack(std::span<const WeightedSample> samples, std::vector<double>& lw,
            std::vector<std::uint8_t>& failed) {
  lw.resize(samples.size());
  failed.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    lw[i] = samples[i].log_weight();
    failed[i] = samples[i].failed ? 1 : 0;
  }
}

}  // namespace

double estimate_probability(std::span<const double> log_weights,
                            std::span<const std::uint8_t> failed) {
  check_lengths(log_weights, failed);
  if (log_weights.empty()) return 0.0;
  const double shift = failed_shift(log_weights, failed);
  if (shift == -kInf) return 0.0;
  CompensatedSum s;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    if (failed[i] && std::isfinite(log_weights[i])) s += std::exp(log_weights[i] - shift);
  }
  return std::exp(shift) * (s.value() / static_cast<double>(log_weights.size()));
}

double estimate_variance(std::span<const double> log_weights, std::span<const std::uint8_t> failed,
                         double p_hat) {
  check_lengths(log_weights, failed);
  if (log_weights.empty()) return 0.0;
  const double shift = failed_shift(log_weights, failed);
  if (shift == -kInf) return 0.0;
  CompensatedSum s2;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    if (failed[i] && std::isfinite(log_weights[i])) s2 += std::exp(2.0 * (log_weights[i] - shift));
  }
  const double n = static_cast<double>(log_weights.size());
  const double scaled_p = p_hat * std::exp(-shift);
  const double v = std::exp(2.0 * shift) * (s2.value() / n - scaled_p * scaled_p);
  return std::max(0.0, v);
}

double estimate_probability(std::span<const WeightedSample> samples) {
  std::vector<double> lw;
  std::vector<std::uint8_t> failed;
  unpack(samples, lw, failed);
  return estimate_probability(lw, failed);
}

double estimate_variance(std::span<const WeightedSample> samples, double p_hat) {
  std::vector<double> lw;
  std::vector<std::uint8_t> failed;
  unpack(samples, lw, failed);
  return estimate_variance(lw, failed, p_hat);
}

std::pair<double, double> confidence_interval(double p_hat, double sigma_hat, std::size_t n_total,
                                              double alpha) {
  if (n_total == 0) throw Error(ErrorKind::invalid_argument, "confidence interval needs n >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "alpha must lie in (0, 1)");
  }
  const double half =
      normal_quantile(1.0 - alpha / 2.0) * sigma_hat / std::sqrt(static_cast<double>(n_total));
  return {std::max(0.0, p_hat - half), p_hat + half};
}

namespace {

void finish_report(EstimationReport& rep, std::span<const double> lw,
                   std::span<const std::uint8_t> failed) {
  rep.n_total = lw.size();
  rep.failures = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  rep.p_hat = estimate_probability(lw, failed);
  rep.sigma_hat = std::sqrt(estimate_variance(lw, failed, rep.p_hat));
  if (rep.n_total > 0) {
    std::tie(rep.ci_lo, rep.ci_hi) = confidence_interval(rep.p_hat, rep.sigma_hat, rep.n_total, rep.alpha);
  }
  if (rep.failures == 0) rep.flags.push_back("no-failure");
}

}  // namespace

// ------------------------------------------------------------ CE objective

CeObjective::CeObjective(const SystemModel& model, Family family, std::size_t packet_size,
                         std::span<const WeightedSample> samples)
    : model_(&model),
      family_(family),
      packet_size_(packet_size),
      full_dim_(theta_dimension(family, model.decomposition())),
      reduced_dim_(reduced_dimension(full_dim_, packet_size)) {
  shift_ = -kInf;
  for (const auto& s : samples) {
    if (s.failed && std::isfinite(s.log_weight())) {
      shift_ = std::max(shift_, s.log_weight());
      ++failed_;
    }
  }
  if (failed_ == 0) {
    throw Error(ErrorKind::objective_undefined, "no failed sample with a finite weight");
  }
  const std::size_t d = model.component_count();
  const AffineLaw nominal(model);
  std::unordered_map<ComponentMask, std::size_t> mask_index;
  auto index_of = [&](ComponentMask m) {
    auto [it, inserted] = mask_index.try_emplace(m, masks_.size());
    if (inserted) masks_.push_back(m);
    return it->second;
  };
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_index;
  auto pair_of = [&](ComponentMask from, std::size_t j) -> Pair& {
    const std::size_t f = index_of(from);
    const std::size_t t = index_of(from ^ (ComponentMask{1} << j));
    auto [it, inserted] = pair_index.try_emplace({f, j}, pairs_.size());
    if (inserted) pairs_.push_back({f, t, 0.0, 0.0});
    return pairs_[it->second];
  };
  CompensatedSum constant;
  Buffer buf{};
  const std::span<double> view(buf.data(), d);
  for (const auto& s : samples) {
    if (!s.failed || !std::isfinite(s.log_weight())) continue;
    const double w = std::exp(s.log_weight() - shift_);
    for (const auto& seg : s.segments) {
      nominal.integrals_given(seg.mode, seg.duration, seg.covariate_integral, view);
      for (std::size_t j = 0; j < d; ++j) {
        if (buf[j] != 0.0) pair_of(seg.broken, j).integral_weight += w * buf[j];
      }
      if (seg.component >= 0) {
        const auto c = static_cast<std::size_t>(seg.component);
        nominal.rates_at(seg.mode, seg.covariate_end, view);
        constant += w * std::log(buf[c]);
        pair_of(seg.broken, c).jump_weight += w;
      }
    }
  }
  constant_ = constant.value();
}

ObjectiveEvaluation CeObjective::evaluate(std::span<const double> reduced,
                                          bool include_constant) const {
  const ImportanceFunction iff(family_, model_->decomposition(),
                               expand_theta(reduced, packet_size_, full_dim_));
  const std::size_t m = masks_.size();
  std::vector<double> lu(m);
  std::vector<double> grads(m * full_dim_);
  for (std::size_t i = 0; i < m; ++i) {
    lu[i] = iff.log_value(masks_[i]);
    iff.grad_log_value(masks_[i], std::span<double>(grads.data() + i * full_dim_, full_dim_));
  }
  CompensatedSum value;
  std::vector<double> grad(full_dim_, 0.0);
  for (const Pair& p : pairs_) {
    const double delta = lu[p.to] - lu[p.from];
    const double e = std::exp(delta);
    value += -p.jump_weight * delta;
    value += p.integral_weight * e;
    const double coef = -p.jump_weight + p.integral_weight * e;
    if (coef == 0.0) continue;
    const double* gt = grads.data() + p.to * full_dim_;
    const double* gf = grads.data() + p.from * full_dim_;
    for (std::size_t i = 0; i < full_dim_; ++i) grad[i] += coef * (gt[i] - gf[i]);
  }
  ObjectiveEvaluation out;
  out.value = value.value() - (include_constant ? constant_ : 0.0);
  out.gradient = reduce_gradient(grad, packet_size_);
  return out;
}

ObjectiveEvaluation ce_objective(std::span<const double> reduced,
                                 std::span<const WeightedSample> samples, const SystemModel& model,
                                 Family family, std::size_t packet_size) {
  return CeObjective(model, family, packet_size, samples).evaluate(reduced);
}

// --------------------------------------------------------- initialization

double first_jump_probability(const SystemModel& model, const ImportanceFunction& iff,
                              double t_tilde) {
  const SystemState z0 = model.initial_state();
  const double h = std::min({t_tilde, model.boundary_time(z0), model.horizon() - model.elapsed(z0)});
  if (!(h > 0.0)) return 0.0;
  const BiasedLaw law(model, iff);
  return -std::expm1(-law.integrated_intensity(z0, h));
}

InitResult init_theta(const SystemModel& model, Family family, std::size_t packet_size,
                      double t_tilde, double p_tilde, std::optional<double> theta_hi) {
  if (!(p_tilde > 0.0 && p_tilde < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "p_tilde must lie in (0, 1)");
  }
  if (!(t_tilde > 0.0) || t_tilde > model.horizon()) {
    throw Error(ErrorKind::invalid_argument, "t_tilde must lie in (0, t_max]");
  }
  InitResult res;
  res.theta = make_theta(family, model.decomposition(), packet_size);
  if (theta_hi) std::fill(res.theta.hi.begin(), res.theta.hi.end(), *theta_hi);
  const std::size_t n = res.theta.reduced.size();
  auto prob = [&](double t) {
    const std::vector<double> reduced(n, t);
    const ImportanceFunction iff(family, model.decomposition(),
                                 expand_theta(reduced, packet_size, res.theta.full_dim));
    return first_jump_probability(model, iff, t_tilde);
  };
  double lo = 0.0;
  double hi = *std::min_element(res.theta.hi.begin(), res.theta.hi.end());
  if (prob(lo) >= p_tilde) {
    std::fill(res.theta.reduced.begin(), res.theta.reduced.end(), 0.0);
    return res;
  }
  if (prob(hi) < p_tilde) {
    std::fill(res.theta.reduced.begin(), res.theta.reduced.end(), hi);
    res.reached = false;
    return res;
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (prob(mid) >= p_tilde ? hi : lo) = mid;
  }
  std::fill(res.theta.reduced.begin(), res.theta.reduced.end(), hi);
  return res;
}

// ------------------------------------------------------------------ loops

namespace {

struct Draw {
  std::vector<WeightedSample> samples;
  std::size_t failures = 0;
};

// Simulates indices start, start+1, ... in doubling batches until n_ce
// failures are seen or max_count draws are made; samples after the n_ce-th
// failure are dropped so the outcome does not depend on the batching.
Draw draw_iteration(const SystemModel& model, const AffineLaw& nominal, const AffineLaw& proposal,
                    std::size_t start, std::size_t max_count, std::size_t n_ce,
                    std::size_t first_batch, const CeOptions& options, std::size_t iteration) {
  Draw out;
  const SimulationOptions sim{options.max_jumps};
  std::size_t batch = std::max<std::size_t>(1, first_batch);
  while (out.samples.size() < max_count && out.failures < n_ce) {
    const std::size_t offset = out.samples.size();
    const std::size_t b = std::min(batch, max_count - offset);
    std::vector<WeightedSample> slot(b);
    parallel_for(b, options.threads, [&](std::size_t i) {
      RandomStream rng(options.seed, start + offset + i);
      const Trajectory traj = simulate_trajectory(model, proposal, rng, sim);
      slot[i] = make_sample(model, traj, nominal, proposal, iteration);
    });
    for (auto& s : slot) {
      out.samples.push_back(std::move(s));
      if (out.samples.back().failed && ++out.failures == n_ce) break;
    }
    batch *= 2;
  }
  return out;
}

}  // namespace

CeRun run_cross_entropy(const SystemModel& model, const CeOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (options.budget == 0) throw Error(ErrorKind::invalid_argument, "budget must be >= 1");
  if (options.n_ce == 0) throw Error(ErrorKind::invalid_argument, "n_ce must be >= 1");
  CeRun run;
  EstimationReport& rep = run.report;
  rep.model = model.name();
  rep.method = "ais";
  rep.family = options.family;
  rep.packet_size = options.packet_size;
  rep.alpha = options.alpha;
  rep.seed = options.seed;

  ThetaParam theta = make_theta(options.family, model.decomposition(), options.packet_size);
  std::fill(theta.lo.begin(), theta.lo.end(), options.theta_lo);
  if (options.theta_hi) std::fill(theta.hi.begin(), theta.hi.end(), *options.theta_hi);
  if (options.initial_theta) {
    theta.reduced = *options.initial_theta;
  } else {
    const InitResult init = init_theta(model, options.family, options.packet_size,
                                       options.init_t.value_or(model.horizon()), options.init_p,
                                       options.theta_hi);
    if (!init.reached) rep.flags.push_back("init-target-unreachable");
    theta.reduced = init.theta.reduced;
    for (std::size_t i = 0; i < theta.reduced.size(); ++i) {
      theta.reduced[i] = std::clamp(theta.reduced[i], theta.lo[i], theta.hi[i]);
    }
  }
  theta.check();

  const AffineLaw nominal(model);
  std::size_t used = 0;
  for (std::size_t iteration = 0; used < options.budget; ++iteration) {
    const ImportanceFunction iff(options.family, model.decomposition(), theta.full());
    const BiasedLaw proposal(model, iff);
    const std::size_t n_ce = options.adapt ? options.n_ce : options.budget;
    Draw draw = draw_iteration(model, nominal, proposal, used, options.budget - used, n_ce,
                               options.first_batch, options, iteration);
    used += draw.samples.size();
    rep.theta_history.push_back(theta.reduced);
    rep.per_iteration.push_back({draw.samples.size(), draw.failures});
    for (auto& s : draw.samples) run.samples.push_back(std::move(s));
    if (draw.failures == 0 || used >= options.budget || !options.adapt) break;

    const CeObjective objective(model, options.family, options.packet_size, run.samples);
    const BfgsResult opt = bfgs_minimize(
        [&](std::span<const double> x) { return objective.evaluate(x, false); }, theta.reduced,
        theta.lo, theta.hi, options.bfgs);
    if (opt.stalled_at_start && !rep.has_flag("optimizer-stalled")) {
      rep.flags.push_back("optimizer-stalled");
    }
    theta.reduced = opt.x;
  }

  std::vector<double> lw;
  std::vector<std::uint8_t> failed;
  unpack(run.samples, lw, failed);
  finish_report(rep, lw, failed);
  rep.wall_time = seconds_since(t0);
  return run;
}

CmcRun run_cmc(const SystemModel& model, const CmcOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (options.budget == 0) throw Error(ErrorKind::invalid_argument, "budget must be >= 1");
  CmcRun run;
  EstimationReport& rep = run.report;
  rep.model = model.name();
  rep.method = "cmc";
  rep.alpha = options.alpha;
  rep.seed = options.seed;
  const AffineLaw law(model, options.rates.value_or(model.nominal_rates()));
  const SimulationOptions sim{options.max_jumps};
  run.failed.assign(options.budget, 0);
  parallel_for(options.budget, options.threads, [&](std::size_t i) {
    RandomStream rng(options.seed, i);
    run.failed[i] = simulate_failure(model, law, rng, sim) ? 1 : 0;
  });
  const std::vector<double> lw(options.budget, 0.0);
  finish_report(rep, lw, run.failed);
  rep.per_iteration.push_back({rep.n_total, rep.failures});
  if (!options.keep_outcomes) run.failed.clear();
  rep.wall_time = seconds_since(t0);
  return run;
}

EstimationReport reverse_reweight(std::span<const WeightedSample> samples,
                                  const AffineLaw& alt_law, double alpha) {
  EstimationReport rep;
  rep.model = alt_law.model().name();
  rep.method = "reverse-reweight";
  rep.alpha = alpha;
  std::vector<double> lw(samples.size());
  std::vector<std::uint8_t> failed(samples.size());
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    lw[i] = digest_log_density(samples[i].segments, alt_law) - samples[i].log_proposal;
    failed[i] = samples[i].failed ? 1 : 0;
    if (failed[i] && !std::isfinite(lw[i])) {
      failed[i] = 0;
      ++excluded;
    }
  }
  finish_report(rep, lw, failed);
  if (excluded > 0) {
    rep.flags.push_back("infinite-ratio-excluded:" + std::to_string(excluded));
  }
  return rep;
}

}  // namespace pdmpis
