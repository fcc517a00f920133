#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "pdmpis/estimation.hpp"

namespace pdmpis {

inline constexpr int kReportSchemaVersion = 1;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

std::string report_to_json(const EstimationReport& report);
EstimationReport report_from_json(std::string_view text);

void write_text(const std::filesystem::path& path, std::string_view text);
void write_report(const std::filesystem::path& path, const EstimationReport& report);
/// Columns: iteration, failed, log_weight, n_jumps.
void write_samples_csv(const std::filesystem::path& path, std::span<const WeightedSample> samples);
/// CMC variant: every sample has iteration 0 and log-weight 0.
void write_outcomes_csv(const std::filesystem::path& path, std::span<const std::uint8_t> failed);
/// Columns: iteration, n, failures, theta_0 ... theta_{k-1}.
void write_theta_history_csv(const std::filesystem::path& path, const EstimationReport& report);

}  // namespace pdmpis
