#include "blackstart/scenario_file.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <vector>

namespace blackstart {

namespace {

using nlohmann::json;

std::string describe(std::size_t line, const std::string& field, const std::string& message) {
    std::string out = "scenario";
    if (line > 0) {
        out += ":" + std::to_string(line);
    }
    if (!field.empty()) {
        out += ": " + field;
    }
    return out + ": " + message;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

/// Walks a dotted path through the raw text, matching each quoted key after
/// the previous one. Good enough for diagnostics; returns 0 when a component
/// cannot be found.
std::size_t locate(std::string_view text, const std::string& path) {
    std::size_t pos = 0;
    std::size_t found = std::string_view::npos;
    std::istringstream parts(path);
    std::string key;
    while (std::getline(parts, key, '.')) {
        const std::size_t bracket = key.find('[');
        if (bracket != std::string::npos) {
            key.resize(bracket);
        }
        const std::size_t at = text.find("\"" + key + "\"", pos);
        if (at == std::string_view::npos) {
            break;
        }
        found = at;
        pos = at + key.size() + 2;
    }
    return found == std::string_view::npos ? 0 : line_of_offset(text, found);
}

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    [[noreturn]] void fail(const std::string& field, const std::string& message) const {
        throw SchemaError(locate(text_, field), field, message);
    }

    void require_object(const json& j, const std::string& field) const {
        if (!j.is_object()) {
            fail(field, "expected an object");
        }
    }

    void allow_keys(const json& obj, const std::string& prefix,
                    std::initializer_list<std::string_view> keys) const {
        for (const auto& [key, value] : obj.items()) {
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                fail(prefix.empty() ? key : prefix + "." + key, "unknown key");
            }
        }
    }

    double number(const json& obj, const std::string& prefix, const char* key,
                  double fallback) const {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            return fallback;
        }
        if (!it->is_number()) {
            fail(join(prefix, key), "expected a number");
        }
        return it->get<double>();
    }

    bool boolean(const json& obj, const char* key, bool fallback) const {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            return fallback;
        }
        if (!it->is_boolean()) {
            fail(key, "expected true or false");
        }
        return it->get<bool>();
    }

    std::vector<double> vector(const json& j, const std::string& field, std::size_t n) const {
        if (!j.is_array() || j.size() != n) {
            fail(field, "expected an array of " + std::to_string(n) + " numbers");
        }
        std::vector<double> out;
        for (const json& v : j) {
            if (!v.is_number()) {
                fail(field, "expected an array of " + std::to_string(n) + " numbers");
            }
            out.push_back(v.get<double>());
        }
        return out;
    }

    /// Runs a library constructor or validator and reports its complaint
    /// against `field`.
    template <class F>
    auto checked(const std::string& field, F&& f) const {
        try {
            return f();
        } catch (const InvalidParameter& e) {
            std::string message = e.what();
            const std::string prefix = field + ": ";
            if (message.rfind(prefix, 0) == 0) {
                message.erase(0, prefix.size());
            }
            fail(field, message);
        }
    }

private:
    static std::string join(const std::string& prefix, const char* key) {
        return prefix.empty() ? std::string(key) : prefix + "." + key;
    }

    std::string_view text_;
};

}  // namespace

SchemaError::SchemaError(std::size_t line, std::string field, const std::string& message)
    : Error(describe(line, field, message)), line_(line), field_(std::move(field)) {}

ScenarioFile parse_scenario_file(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // nlohmann reports the offset one past the offending character.
        const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
        throw SchemaError(line_of_offset(text, offset), "", "malformed JSON");
    }

    const Reader r(text);
    r.require_object(doc, "");
    r.allow_keys(doc, "",
                 {"system", "core", "filter", "profile", "residual_wb", "prefluxing",
                  "demag_first", "demag", "dt_s", "t_end_s", "control_zoh", "output_stride"});

    ScenarioFile file;
    Scenario& s = file.scenario;

    const SystemParams rated = SystemParams::rated_defaults();
    if (const auto it = doc.find("system"); it != doc.end()) {
        r.require_object(*it, "system");
        r.allow_keys(*it, "system", {"v_ll_rms", "f0", "v_dc", "i_rated_peak", "f_sw"});
        const json& j = *it;
        s.params = r.checked("system", [&] {
            return SystemParams(r.number(j, "system", "v_ll_rms", rated.v_ll_rms()),
                                r.number(j, "system", "f0", rated.f0()), rated.s_rated(),
                                r.number(j, "system", "v_dc", rated.v_dc()),
                                r.number(j, "system", "i_rated_peak", rated.i_rated_peak()),
                                r.number(j, "system", "f_sw", rated.f_sw()));
        });
    }

    s.core = CoreParams::defaults(s.params);
    if (const auto it = doc.find("core"); it != doc.end()) {
        r.require_object(*it, "core");
        r.allow_keys(*it, "core", {"lambda_knee", "l_mag", "l_sat", "r_core", "r_wind"});
        const json& j = *it;
        s.core.lambda_knee = r.number(j, "core", "lambda_knee", s.core.lambda_knee);
        s.core.l_mag = r.number(j, "core", "l_mag", s.core.l_mag);
        s.core.l_sat = r.number(j, "core", "l_sat", s.core.l_sat);
        s.core.r_core = r.number(j, "core", "r_core", s.core.r_core);
        s.core.r_wind = r.number(j, "core", "r_wind", s.core.r_wind);
        r.checked("core", [&] { s.core.validate(); });
    }

    if (const auto it = doc.find("filter"); it != doc.end()) {
        if (it->is_null()) {
            s.filter.reset();
        } else {
            r.require_object(*it, "filter");
            r.allow_keys(*it, "filter", {"l_f", "c_f", "r_damp"});
            FilterParams f;
            f.l_f = r.number(*it, "filter", "l_f", f.l_f);
            f.c_f = r.number(*it, "filter", "c_f", f.c_f);
            f.r_damp = r.number(*it, "filter", "r_damp", f.r_damp);
            r.checked("filter", [&] { f.validate(); });
            s.filter = f;
        }
    }

    const auto profile = doc.find("profile");
    if (profile == doc.end()) {
        r.fail("profile", "missing required key");
    }
    if (!profile->is_string()) {
        r.fail("profile", "expected \"hard\", \"ultrafast\" or \"spiral\"");
    }
    const std::string name = profile->get<std::string>();
    if (name != "hard" && name != "ultrafast" && name != "spiral") {
        r.fail("profile", "expected \"hard\", \"ultrafast\" or \"spiral\"");
    }
    s.profile = make_profile(parse_profile_kind(name), s.params);

    const auto residual = doc.find("residual_wb");
    const auto preflux = doc.find("prefluxing");
    if (residual != doc.end() && preflux != doc.end()) {
        r.fail("prefluxing", "residual_wb and prefluxing are mutually exclusive");
    }
    if (residual != doc.end()) {
        const auto v = r.vector(*residual, "residual_wb", 2);
        s.residual = {v[0], v[1]};
        r.checked("residual_wb", [&] { (void)set_residual_flux({}, s.residual, s.params); });
    }
    if (preflux != doc.end()) {
        r.require_object(*preflux, "prefluxing");
        r.allow_keys(*preflux, "prefluxing", {"pattern_v", "duration_s"});
        const auto pattern = preflux->find("pattern_v");
        if (pattern == preflux->end()) {
            r.fail("prefluxing.pattern_v", "missing required key");
        }
        if (!preflux->contains("duration_s")) {
            r.fail("prefluxing.duration_s", "missing required key");
        }
        const auto v = r.vector(*pattern, "prefluxing.pattern_v", 3);
        const double duration = r.number(*preflux, "prefluxing", "duration_s", 0.0);
        s.prefluxing = r.checked("prefluxing.duration_s",
                                 [&] { return build_residual_flux({v[0], v[1], v[2]}, duration); });
    }

    s.demag_first = r.boolean(doc, "demag_first", false);
    if (const auto it = doc.find("demag"); it != doc.end()) {
        r.require_object(*it, "demag");
        r.allow_keys(*it, "demag", {"i_sat", "v_d", "ctrl_bandwidth", "timeout_s"});
        s.demag.i_sat = r.number(*it, "demag", "i_sat", s.demag.i_sat);
        s.demag.v_d = r.number(*it, "demag", "v_d", s.demag.v_d);
        s.demag.ctrl_bandwidth = r.number(*it, "demag", "ctrl_bandwidth", s.demag.ctrl_bandwidth);
        s.demag.timeout = r.number(*it, "demag", "timeout_s", s.demag.timeout);
        r.checked("demag", [&] { s.demag.validate(); });
    }

    s.dt = r.number(doc, "", "dt_s", s.dt);
    s.t_end = r.number(doc, "", "t_end_s", s.t_end);
    s.control_zoh = r.boolean(doc, "control_zoh", false);

    if (const auto it = doc.find("output_stride"); it != doc.end()) {
        if (!it->is_number_unsigned() || it->get<std::size_t>() == 0) {
            r.fail("output_stride", "expected a positive integer");
        }
        file.output_stride = it->get<std::size_t>();
    }

    try {
        s.validate();
    } catch (const InvalidParameter& e) {
        const std::string what = e.what();
        const std::string field = what.rfind("dt", 0) == 0      ? "dt_s"
                                  : what.rfind("t_end", 0) == 0 ? "t_end_s"
                                                                : "";
        throw SchemaError(field.empty() ? 0 : locate(text, field), field, what);
    }
    return file;
}

ScenarioFile load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SchemaError(0, "", "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_file(buffer.str());
}

nlohmann::json to_json(const ScenarioFile& file) {
    const Scenario& s = file.scenario;
    json doc;
    doc["system"] = {{"v_ll_rms", s.params.v_ll_rms()},
                     {"f0", s.params.f0()},
                     {"v_dc", s.params.v_dc()},
                     {"i_rated_peak", s.params.i_rated_peak()},
                     {"f_sw", s.params.f_sw()}};
    doc["core"] = {{"lambda_knee", s.core.lambda_knee},
                   {"l_mag", s.core.l_mag},
                   {"l_sat", s.core.l_sat},
                   {"r_core", s.core.r_core},
                   {"r_wind", s.core.r_wind}};
    if (s.filter) {
        doc["filter"] = {{"l_f", s.filter->l_f}, {"c_f", s.filter->c_f}, {"r_damp", s.filter->r_damp}};
    } else {
        doc["filter"] = nullptr;
    }
    doc["profile"] = std::string(to_string(kind_of(s.profile)));
    if (s.prefluxing) {
        const ThreePhase& v = s.prefluxing->pattern_v;
        doc["prefluxing"] = {{"pattern_v", {v.a, v.b, v.c}},
                             {"duration_s", s.prefluxing->duration}};
    } else {
        doc["residual_wb"] = {s.residual.alpha, s.residual.beta};
    }
    doc["demag_first"] = s.demag_first;
    doc["demag"] = {{"i_sat", s.demag.i_sat},
                    {"v_d", s.demag.v_d},
                    {"ctrl_bandwidth", s.demag.ctrl_bandwidth},
                    {"timeout_s", s.demag.timeout}};
    doc["dt_s"] = s.dt;
    doc["t_end_s"] = s.t_end;
    doc["control_zoh"] = s.control_zoh;
    doc["output_stride"] = file.output_stride;
    return doc;
}

}  // namespace blackstart
