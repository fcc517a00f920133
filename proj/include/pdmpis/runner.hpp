#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pdmpis/config.hpp"
#include "pdmpis/estimation.hpp"
#include "pdmpis/importance.hpp"

namespace pdmpis {

struct RunConfig {
  std::filesystem::path model;
  std::string method = "ais";
  std::optional<Family> family;
  std::size_t budget = 10000;
  std::optional<std::size_t> n_ce;
  std::optional<std::size_t> packet_size;
  std::optional<double> init_t;
  std::optional<double> init_p;
  std::optional<double> theta_hi;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::size_t replications = 1;
  std::filesystem::path out = "pdmpis_out";
  unsigned threads = 0;
  std::optional<double> reference;
};

/// Throws a config error when the run configuration is inconsistent.
void validate(const RunConfig& config);

/// n_ce default: 10 failures per iteration up to a budget of 1000, 50 above.
std::size_t default_n_ce(std::size_t budget) noexcept;

/// Seed of replicate r (r = 0 keeps the base seed).
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r) noexcept;

/// Runs one estimation with the model's defaults filled in; no files written.
CeRun run_ais(const LoadedModel& model, const RunConfig& config, std::uint64_t seed);

struct RunOutcome {
  std::vector<EstimationReport> reports;
  std::filesystem::path out_dir;
};

/// Executes the run and writes report.json, samples.csv and
/// theta_history.csv (one set per replicate plus coverage.csv when
/// replications > 1).
RunOutcome execute_run(const RunConfig& config, std::ostream& log);

/// "N MPS, M MCS" followed by the canonical listings.
std::string describe_decomposition(const LoadedModel& model);

/// Command-line entry point. Exit status: 0 ok, 1 runtime/model error,
/// 2 configuration error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pdmpis
