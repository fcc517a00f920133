#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pdmpis/importance.hpp"
#include "pdmpis/law.hpp"
#include "pdmpis/model.hpp"
#include "pdmpis/optimize.hpp"
#include "pdmpis/state.hpp"

namespace pdmpis {

/// One flow segment of a stored path: enough to re-evaluate the log density
/// under any affine law on the same model without re-running the flow.
struct SegmentDigest {
  std::vector<std::int8_t> mode;
  ComponentMask broken = 0;
  double duration = 0.0;
  double covariate_integral = 0.0;
  /// Covariate at the segment end (the jump instant).
  double covariate_end = 0.0;
  /// Component toggled by the spontaneous jump closing the segment, -1 if none.
  std::int32_t component = -1;
};

struct WeightedSample {
  std::vector<SegmentDigest> segments;
  bool failed = false;
  std::size_t n_jumps = 0;
  double log_nominal = 0.0;
  double log_proposal = 0.0;
  std::size_t iteration = 0;

  double log_weight() const noexcept { return log_nominal - log_proposal; }
};

std::vector<SegmentDigest> digest_segments(const SystemModel& model, const Trajectory& traj);
double digest_log_density(std::span<const SegmentDigest> segments, const AffineLaw& law);
WeightedSample make_sample(const SystemModel& model, const Trajectory& traj,
                           const AffineLaw& nominal, const AffineLaw& proposal,
                           std::size_t iteration);

struct IterationSummary {
  std::size_t n = 0;
  std::size_t failures = 0;
};

struct EstimationReport {
  std::string model;
  std::string method;
  std::optional<Family> family;
  std::size_t packet_size = 1;
  double p_hat = 0.0;
  double sigma_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double alpha = 0.05;
  std::size_t n_total = 0;
  std::size_t failures = 0;
  /// Reduced parameter used by each iteration.
  std::vector<std::vector<double>> theta_history;
  std::vector<IterationSummary> per_iteration;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const;
};

double estimate_probability(std::span<const double> log_weights,
                            std::span<const std::uint8_t> failed);
/// Asymptotic variance sigma^2, clamped at zero.
double estimate_variance(std::span<const double> log_weights, std::span<const std::uint8_t> failed,
                         double p_hat);
double estimate_probability(std::span<const WeightedSample> samples);
double estimate_variance(std::span<const WeightedSample> samples, double p_hat);
std::pair<double, double> confidence_interval(double p_hat, double sigma_hat, std::size_t n_total,
                                              double alpha);

/// Empirical cross-entropy objective -sum_{failed} w_r log q_theta(Z_r) over
/// reduced coordinates. Weights are shifted by the largest failed log-weight,
/// which rescales the objective by a positive constant. Terms are aggregated
/// by (broken set, toggled component) so evaluation cost does not grow with
/// the sample count.
class CeObjective {
 public:
  CeObjective(const SystemModel& model, Family family, std::size_t packet_size,
              std::span<const WeightedSample> samples);

  std::size_t dimension() const noexcept { return reduced_dim_; }
  std::size_t full_dimension() const noexcept { return full_dim_; }
  std::size_t failed_samples() const noexcept { return failed_; }
  double log_shift() const noexcept { return shift_; }

  /// With include_constant = false the theta-independent part is dropped.
  ObjectiveEvaluation evaluate(std::span<const double> reduced, bool include_constant = true) const;
  double value(std::span<const double> reduced) const { return evaluate(reduced).value; }

 private:
  struct Pair {
    std::size_t from = 0;
    std::size_t to = 0;
    double jump_weight = 0.0;
    double integral_weight = 0.0;
  };

  const SystemModel* model_;
  Family family_;
  std::size_t packet_size_;
  std::size_t full_dim_;
  std::size_t reduced_dim_;
  std::size_t failed_ = 0;
  double shift_ = 0.0;
  double constant_ = 0.0;
  std::vector<ComponentMask> masks_;
  std::vector<Pair> pairs_;
};

ObjectiveEvaluation ce_objective(std::span<const double> reduced,
                                 std::span<const WeightedSample> samples, const SystemModel& model,
                                 Family family, std::size_t packet_size);

/// Probability that the first jump happens before t_tilde under the biased
/// law started from the model's initial state.
double first_jump_probability(const SystemModel& model, const ImportanceFunction& iff,
                              double t_tilde);

struct InitResult {
  ThetaParam theta;
  bool reached = true;
};

/// Smallest constant reduced theta in the box whose first-jump probability
/// before t_tilde is at least p_tilde (bisection to 1e-10).
InitResult init_theta(const SystemModel& model, Family family, std::size_t packet_size,
                      double t_tilde, double p_tilde, std::optional<double> theta_hi = {});

struct CeOptions {
  Family family = Family::mps;
  std::size_t budget = 10000;
  std::size_t n_ce = 50;
  double alpha = 0.05;
  std::size_t packet_size = 1;
  std::optional<double> init_t;
  double init_p = 1.0 / 3.0;
  std::optional<std::vector<double>> initial_theta;
  bool adapt = true;
  double theta_lo = 0.0;
  std::optional<double> theta_hi;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::size_t first_batch = 100;
  std::size_t max_jumps = 1'000'000;
  BfgsOptions bfgs;
};

struct CeRun {
  EstimationReport report;
  std::vector<WeightedSample> samples;
};

CeRun run_cross_entropy(const SystemModel& model, const CeOptions& options);

struct CmcOptions {
  std::size_t budget = 10000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::size_t max_jumps = 1'000'000;
  bool keep_outcomes = false;
  /// Alternative rates; nominal when empty.
  std::optional<RateTable> rates;
};

struct CmcRun {
  EstimationReport report;
  std::vector<std::uint8_t> failed;
};

CmcRun run_cmc(const SystemModel& model, const CmcOptions& options);

/// Replaces log pi_0 by log pi~ in every stored sample. Failed samples whose
/// log-ratio is not finite are excluded and the report is annotated.
EstimationReport reverse_reweight(std::span<const WeightedSample> samples,
                                  const AffineLaw& alt_law, double alpha = 0.05);

/// Applies fn(i) for i in [0, n) on up to `threads` workers (0 = hardware).
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace pdmpis
