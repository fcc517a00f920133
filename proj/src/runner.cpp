#include "pdmpis/runner.hpp"

#include <cstdlib>
#include <sstream>

#include <CLI11.hpp>

#include "pdmpis/error.hpp"
#include "pdmpis/report_io.hpp"
#include "pdmpis/rng.hpp"

namespace pdmpis {

namespace fs = std::filesystem;

void validate(const RunConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::config, what); };
  if (c.model.empty()) fail("--model is required");
  if (c.method != "cmc" && c.method != "ais") fail("--method must be cmc or ais");
  if (c.method == "ais" && !c.family) fail("--family is required with --method ais");
  if (c.method == "cmc" && c.family) fail("--family applies to --method ais only");
  if (c.budget < 1) fail("--budget must be >= 1");
  if (c.replications < 1) fail("--replications must be >= 1");
  if (c.n_ce && *c.n_ce < 1) fail("--n-ce must be >= 1");
  if (c.packet_size && *c.packet_size < 1) fail("--packet-size must be >= 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) fail("--alpha must lie in (0, 1)");
  if (c.init_p && !(*c.init_p > 0.0 && *c.init_p < 1.0)) fail("--init-p must lie in (0, 1)");
  if (c.init_t && !(*c.init_t > 0.0)) fail("--init-t must be > 0");
  if (c.theta_hi && !(*c.theta_hi > 0.0)) fail("--theta-hi must be > 0");
}

std::size_t default_n_ce(std::size_t budget) noexcept { return budget <= 1000 ? 10 : 50; }

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r) noexcept {
  return r == 0 ? seed : mix_seed(seed, r);
}

CeRun run_ais(const LoadedModel& model, const RunConfig& config, std::uint64_t seed) {
  CeOptions o;
  o.family = *config.family;
  o.budget = config.budget;
  o.n_ce = config.n_ce.value_or(default_n_ce(config.budget));
  o.alpha = config.alpha;
  o.packet_size = config.packet_size.value_or(model.defaults.packet_size_for(o.family));
  o.init_t = config.init_t ? config.init_t : model.defaults.init_t;
  o.init_p = config.init_p.value_or(model.defaults.init_p);
  o.theta_hi = config.theta_hi ? config.theta_hi : model.defaults.theta_hi;
  o.seed = seed;
  o.threads = config.threads;
  return run_cross_entropy(*model.model, o);
}

namespace {

std::string summary_line(const EstimationReport& r) {
  std::ostringstream os;
  os << r.method << ' ' << r.model << ": p_hat=" << format_double(r.p_hat)
     << " sigma_hat=" << format_double(r.sigma_hat) << " ci=[" << format_double(r.ci_lo) << ", "
     << format_double(r.ci_hi) << "] n=" << r.n_total << " failures=" << r.failures;
  for (const auto& f : r.flags) os << " [" << f << ']';
  return os.str();
}

EstimationReport run_once(const LoadedModel& model, const RunConfig& config, std::uint64_t seed,
                          const fs::path& dir) {
  fs::create_directories(dir);
  EstimationReport report;
  if (config.method == "cmc") {
    CmcOptions o;
    o.budget = config.budget;
    o.alpha = config.alpha;
    o.seed = seed;
    o.threads = config.threads;
    o.keep_outcomes = true;
    CmcRun run = run_cmc(*model.model, o);
    write_outcomes_csv(dir / "samples.csv", run.failed);
    report = std::move(run.report);
  } else {
    CeRun run = run_ais(model, config, seed);
    write_samples_csv(dir / "samples.csv", run.samples);
    report = std::move(run.report);
  }
  write_report(dir / "report.json", report);
  write_theta_history_csv(dir / "theta_history.csv", report);
  return report;
}

fs::path output_dir(const RunConfig& config, bool out_given) {
  if (!out_given) {
    if (const char* env = std::getenv("PDMPIS_OUTPUT_DIR"); env && *env) return fs::path(env);
  }
  return config.out;
}

RunOutcome execute(const RunConfig& config, std::ostream& log, bool out_given) {
  validate(config);
  const LoadedModel model = load_model(config.model);
  RunOutcome outcome;
  outcome.out_dir = output_dir(config, out_given);
  if (config.replications == 1) {
    outcome.reports.push_back(run_once(model, config, config.seed, outcome.out_dir));
    log << summary_line(outcome.reports.back()) << '\n';
    return outcome;
  }
  std::ostringstream coverage;
  coverage << "replicate,seed,p_hat,sigma_hat,ci_lo,ci_hi";
  if (config.reference) coverage << ",contains_reference";
  coverage << '\n';
  std::size_t covered = 0;
  for (std::size_t r = 0; r < config.replications; ++r) {
    const std::uint64_t seed = replicate_seed(config.seed, r);
    char name[32];
    std::snprintf(name, sizeof name, "rep_%03zu", r);
    const EstimationReport rep = run_once(model, config, seed, outcome.out_dir / name);
    coverage << r << ',' << seed << ',' << format_double(rep.p_hat) << ','
             << format_double(rep.sigma_hat) << ',' << format_double(rep.ci_lo) << ','
             << format_double(rep.ci_hi);
    if (config.reference) {
      const bool in = rep.ci_lo <= *config.reference && *config.reference <= rep.ci_hi;
      covered += in ? 1 : 0;
      coverage << ',' << (in ? 1 : 0);
    }
    coverage << '\n';
    log << name << ' ' << summary_line(rep) << '\n';
    outcome.reports.push_back(rep);
  }
  write_text(outcome.out_dir / "coverage.csv", coverage.str());
  if (config.reference) {
    log << covered << '/' << config.replications << " intervals contain the reference "
        << format_double(*config.reference) << '\n';
  }
  return outcome;
}

}  // namespace

RunOutcome execute_run(const RunConfig& config, std::ostream& log) {
  return execute(config, log, true);
}

std::string describe_decomposition(const LoadedModel& model) {
  const CutPathDecomposition& d = model.model->decomposition();
  std::ostringstream os;
  os << d.mps.size() << " MPS, " << d.mcs.size() << " MCS\n";
  auto list = [&](const char* title, const std::vector<ComponentSet>& sets) {
    os << title << ":\n";
    for (const auto& s : sets) {
      os << "  {";
      for (std::size_t i = 0; i < s.size(); ++i) {
        os << (i ? ", " : "") << model.component_names[s[i]];
      }
      os << "}\n";
    }
  };
  list("MPS", d.mps);
  list("MCS", d.mcs);
  return os.str();
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rare-event failure probability estimation for piecewise deterministic systems"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string family;
  auto* run = app.add_subcommand("run", "Estimate the failure probability of a model");
  run->add_option("--model", rc.model, "Model JSON file")->required();
  run->add_option("--method", rc.method, "cmc or ais")->capture_default_str();
  run->add_option("--family", family, "Importance family for ais: bc, mps or mcs");
  run->add_option("--budget", rc.budget, "Total number of trajectories")->capture_default_str();
  run->add_option("--n-ce", rc.n_ce, "Failures per cross-entropy iteration");
  run->add_option("--packet-size", rc.packet_size, "Theta packet size");
  run->add_option("--init-t", rc.init_t, "Initialization horizon t~");
  run->add_option("--init-p", rc.init_p, "Initialization first-jump probability p~");
  run->add_option("--theta-hi", rc.theta_hi, "Upper bound of each reduced theta coordinate");
  run->add_option("--alpha", rc.alpha, "Confidence level is 1 - alpha")->capture_default_str();
  run->add_option("--seed", rc.seed, "Random seed")->capture_default_str();
  run->add_option("--replications", rc.replications, "Independent replicate runs")
      ->capture_default_str();
  auto* out_opt = run->add_option("--out", rc.out, "Output directory")->capture_default_str();
  run->add_option("--threads", rc.threads, "Worker threads (0 = all cores)")->capture_default_str();
  run->add_option("--reference", rc.reference, "Reference value for coverage.csv");

  fs::path decompose_model;
  auto* decompose = app.add_subcommand("decompose", "Print minimal path and cut sets of a model");
  decompose->add_option("--model", decompose_model, "Model JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (run->parsed()) {
      if (!family.empty()) rc.family = parse_family(family);
      execute(rc, out, out_opt->count() > 0);
    } else if (decompose->parsed()) {
      out << describe_decomposition(load_model(decompose_model));
    }
    return 0;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return e.kind() == ErrorKind::config ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace pdmpis
