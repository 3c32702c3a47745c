#pragma once

// Output files: CSV series with round-trip number formatting, the metrics
// document and atomic file replacement.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "blackstart/scenario_file.hpp"
#include "blackstart/sim.hpp"

namespace blackstart {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kMetricsSchemaVersion = 1;

inline constexpr std::string_view kWaveformsHeader =
    "t_s,v_inv_a,v_inv_b,v_inv_c,v_pcc_a,v_pcc_b,v_pcc_c,i_inv_a,i_inv_b,i_inv_c,"
    "i_pcc_a,i_pcc_b,i_pcc_c,lambda_a,lambda_b,lambda_c,lambda_alpha,lambda_beta";
inline constexpr std::string_view kTrajectoryHeader = "t_s,lambda_alpha,lambda_beta";

/// General-format decimal with 17 significant digits; parsing the text gives
/// back the same double.
[[nodiscard]] std::string format_number(double value);

/// Appends `values` as one comma-separated, LF-terminated row.
void write_csv_row(std::ostream& out, std::span<const double> values);

void write_waveforms_csv(std::ostream& out, std::span<const Sample> series, std::size_t stride = 1);
void write_trajectory_csv(std::ostream& out, std::span<const Sample> series,
                          std::size_t stride = 1);

[[nodiscard]] nlohmann::json to_json(const Metrics& metrics);

/// metrics.json contents: metrics, demag report, profile start time, the
/// resolved scenario and version stamps. Keys are sorted.
[[nodiscard]] nlohmann::json metrics_document(const SimResult& result, const ScenarioFile& file);

/// Writes through a sibling temporary file and renames it over `path`, so
/// readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace blackstart
