#pragma once

// JSON scenario files: parsing with defaults and strict key checking, and the
// resolved echo written next to simulation outputs.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "blackstart/errors.hpp"
#include "blackstart/sim.hpp"

namespace blackstart {

/// Malformed or invalid scenario document. `line()` is 1-based and 0 when no
/// position is known; `field()` is a dotted path such as "core.l_sat".
class SchemaError : public Error {
public:
    SchemaError(std::size_t line, std::string field, const std::string& message);

    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] const std::string& field() const { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

struct ScenarioFile {
    Scenario scenario;
    std::size_t output_stride = 1;  ///< write every n-th sample to the CSV files
};

/// Parses a scenario document. Omitted sections take the rated defaults; core
/// defaults follow the (possibly overridden) system ratings. "profile" is the
/// only required key.
[[nodiscard]] ScenarioFile parse_scenario_file(std::string_view text);

/// Reads and parses a file; an unreadable file is reported as a SchemaError
/// on field "".
[[nodiscard]] ScenarioFile load_scenario_file(const std::filesystem::path& path);

/// Fully resolved document; parsing it yields the same scenario.
[[nodiscard]] nlohmann::json to_json(const ScenarioFile& file);

}  // namespace blackstart
