#include "blackstart/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <system_error>

namespace blackstart {

std::string format_number(double value) {
    std::array<char, 32> buf{};
    const auto res =
        std::to_chars(buf.data(), buf.data() + buf.size(), value + 0.0, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

void write_csv_row(std::ostream& out, std::span<const double> values) {
    std::array<char, 32> buf{};
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out.put(',');
        }
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), values[i] + 0.0,
                                       std::chars_format::general, 17);
        out.write(buf.data(), res.ptr - buf.data());
    }
    out.put('\n');
}

void write_waveforms_csv(std::ostream& out, std::span<const Sample> series, std::size_t stride) {
    out << kWaveformsHeader << '\n';
    stride = std::max<std::size_t>(stride, 1);
    for (std::size_t i = 0; i < series.size(); i += stride) {
        const Sample& s = series[i];
        const std::array<double, 18> row{
            s.t,           s.v_inv.a,     s.v_inv.b,      s.v_inv.c,     s.v_pcc.a,     s.v_pcc.b,
            s.v_pcc.c,     s.i_inv.a,     s.i_inv.b,      s.i_inv.c,     s.i_pcc.a,     s.i_pcc.b,
            s.i_pcc.c,     s.lambda.a,    s.lambda.b,     s.lambda.c,    s.lambda_ab.alpha,
            s.lambda_ab.beta};
        write_csv_row(out, row);
    }
}

void write_trajectory_csv(std::ostream& out, std::span<const Sample> series, std::size_t stride) {
    out << kTrajectoryHeader << '\n';
    stride = std::max<std::size_t>(stride, 1);
    for (std::size_t i = 0; i < series.size(); i += stride) {
        const Sample& s = series[i];
        const std::array<double, 3> row{s.t, s.lambda_ab.alpha, s.lambda_ab.beta};
        write_csv_row(out, row);
    }
}

nlohmann::json to_json(const Metrics& m) {
    nlohmann::json j;
    j["method"] = std::string(to_string(m.method));
    j["peak_i_pcc_pu"] = m.peak_i_pcc_pu;
    j["peak_i_inv_pu"] = m.peak_i_inv_pu;
    j["flux_dc_offset_wb"] = m.flux_dc_offset_wb;
    j["flux_dc_offset_alpha_wb"] = m.flux_dc_offset.alpha;
    j["flux_dc_offset_beta_wb"] = m.flux_dc_offset.beta;
    j["startup_time_s"] = m.startup_time_s ? nlohmann::json(*m.startup_time_s) : nlohmann::json();
    return j;
}

nlohmann::json metrics_document(const SimResult& result, const ScenarioFile& file) {
    nlohmann::json doc;
    doc["schema_version"] = kMetricsSchemaVersion;
    doc["tool_version"] = std::string(kToolVersion);
    doc["metrics"] = to_json(result.metrics);
    if (result.demag) {
        doc["demag"] = {{"tau_measured_s", result.demag->tau_measured},
                        {"duration_s", result.demag->duration}};
    } else {
        doc["demag"] = nullptr;
    }
    doc["profile_start_s"] = result.profile_start_time;
    doc["scenario"] = to_json(file);
    return doc;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) {
                throw Error("cannot write " + tmp.string());
            }
            writer(out);
            out.flush();
            if (!out) {
                throw Error("write failed for " + tmp.string());
            }
        }
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    write_file_atomic(path, [contents](std::ostream& out) {
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    });
}

}  // namespace blackstart
