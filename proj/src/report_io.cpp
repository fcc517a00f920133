#include "pdmpis/report_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pdmpis/error.hpp"

namespace pdmpis {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string report_to_json(const EstimationReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["model"] = r.model;
  j["method"] = r.method;
  j["family"] = r.family ? json(std::string(to_string(*r.family))) : json(nullptr);
  j["packet_size"] = r.packet_size;
  j["p_hat"] = finite_or_null(r.p_hat);
  j["sigma_hat"] = finite_or_null(r.sigma_hat);
  j["ci"] = {{"lo", finite_or_null(r.ci_lo)}, {"hi", finite_or_null(r.ci_hi)}, {"alpha", r.alpha}};
  j["n_total"] = r.n_total;
  j["failures"] = r.failures;
  j["theta_history"] = r.theta_history;
  json iters = json::array();
  for (const auto& it : r.per_iteration) iters.push_back({{"n", it.n}, {"failures", it.failures}});
  j["per_iteration"] = iters;
  j["seed"] = r.seed;
  j["flags"] = r.flags;
  j["wall_time"] = r.wall_time;
  return j.dump(2) + "\n";
}

EstimationReport report_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw Error(ErrorKind::config, "unsupported report schema_version");
    }
    auto num = [](const json& v) { return v.is_null() ? std::nan("") : v.get<double>(); };
    EstimationReport r;
    r.model = j.at("model").get<std::string>();
    r.method = j.at("method").get<std::string>();
    if (!j.at("family").is_null()) r.family = parse_family(j.at("family").get<std::string>());
    r.packet_size = j.at("packet_size").get<std::size_t>();
    r.p_hat = num(j.at("p_hat"));
    r.sigma_hat = num(j.at("sigma_hat"));
    r.ci_lo = num(j.at("ci").at("lo"));
    r.ci_hi = num(j.at("ci").at("hi"));
    r.alpha = j.at("ci").at("alpha").get<double>();
    r.n_total = j.at("n_total").get<std::size_t>();
    r.failures = j.at("failures").get<std::size_t>();
    r.theta_history = j.at("theta_history").get<std::vector<std::vector<double>>>();
    for (const auto& it : j.at("per_iteration")) {
      r.per_iteration.push_back({it.at("n").get<std::size_t>(), it.at("failures").get<std::size_t>()});
    }
    r.seed = j.at("seed").get<std::uint64_t>();
    r.flags = j.at("flags").get<std::vector<std::string>>();
    r.wall_time = j.at("wall_time").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, std::string("bad report: ") + e.what());
  }
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::config, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::config, "failed writing " + path.string());
}

void write_report(const std::filesystem::path& path, const EstimationReport& report) {
  write_text(path, report_to_json(report));
}

void write_samples_csv(const std::filesystem::path& path, std::span<const WeightedSample> samples) {
  std::ostringstream os;
  os << "iteration,failed,log_weight,n_jumps\n";
  for (const auto& s : samples) {
    os << s.iteration << ',' << (s.failed ? 1 : 0) << ',' << format_double(s.log_weight()) << ','
       << s.n_jumps << '\n';
  }
  write_text(path, os.str());
}

void write_outcomes_csv(const std::filesystem::path& path, std::span<const std::uint8_t> failed) {
  std::string text = "iteration,failed,log_weight,n_jumps\n";
  text.reserve(text.size() + failed.size() * 10);
  for (std::uint8_t f : failed) {
    text += f ? "0,1,0,\n" : "0,0,0,\n";
  }
  write_text(path, text);
}

void write_theta_history_csv(const std::filesystem::path& path, const EstimationReport& report) {
  std::ostringstream os;
  std::size_t width = 0;
  for (const auto& t : report.theta_history) width = std::max(width, t.size());
  os << "iteration,n,failures";
  for (std::size_t i = 0; i < width; ++i) os << ",theta_" << i;
  os << '\n';
  for (std::size_t it = 0; it < report.per_iteration.size(); ++it) {
    os << it << ',' << report.per_iteration[it].n << ',' << report.per_iteration[it].failures;
    if (it < report.theta_history.size()) {
      for (double v : report.theta_history[it]) os << ',' << format_double(v);
    }
    os << '\n';
  }
  write_text(path, os.str());
}

}  // namespace pdmpis
