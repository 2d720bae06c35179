// io.hpp - config files, overrides and the CSV / JSON artifacts

#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "chiralent/core.hpp"
#include "chiralent/experiments.hpp"
#include "chiralent/format.hpp"
#include "chiralent/markovian.hpp"
#include "chiralent/scattering.hpp"

namespace chiralent {

using json = nlohmann::ordered_json;

inline json qubit_to_json(const QubitParams& q) {
    return json{{"omega", q.omega},
                {"gamma_r", q.gamma_r},
                {"gamma_l", q.gamma_l},
                {"gamma_loss", q.gamma_loss},
                {"position", q.position}};
}

inline json config_to_json(const SystemConfig& c) {
    return json{{"qubit1", qubit_to_json(c.qubit1)},
                {"qubit2", qubit_to_json(c.qubit2)},
                {"v_g", c.v_g},
                {"omega0", c.omega0}};
}

namespace detail {

inline double number_field(const json& value, const std::string& path) {
    if (!value.is_number())
        throw ValidationError(path, "expected a number");
    return value.get<double>();
}

inline QubitParams qubit_from_json(const json& j, const std::string& prefix, QubitParams q) {
    if (!j.is_object())
        throw ValidationError(prefix, "expected an object");
    for (const auto& [key, value] : j.items()) {
        const std::string path = prefix + "." + key;
        if (key == "omega") q.omega = number_field(value, path);
        else if (key == "gamma_r") q.gamma_r = number_field(value, path);
        else if (key == "gamma_l") q.gamma_l = number_field(value, path);
        else if (key == "gamma_loss") q.gamma_loss = number_field(value, path);
        else if (key == "position") q.position = number_field(value, path);
        else throw ValidationError(path, "unknown key");
    }
    return q;
}

} // namespace detail

/// Reads a SystemConfig from JSON whose keys are exactly the struct's field
/// names. Missing keys keep their defaults; unknown keys are errors.
inline SystemConfig config_from_json(const json& j, SystemConfig base = {}) {
    if (!j.is_object())
        throw ValidationError("config", "top level must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "qubit1") base.qubit1 = detail::qubit_from_json(value, key, base.qubit1);
        else if (key == "qubit2") base.qubit2 = detail::qubit_from_json(value, key, base.qubit2);
        else if (key == "v_g") base.v_g = detail::number_field(value, key);
        else if (key == "omega0") base.omega0 = detail::number_field(value, key);
        else throw ValidationError(key, "unknown key");
    }
    return base;
}

inline json parse_json_text(std::string_view text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(source, std::string("malformed JSON: ") + e.what());
    }
}

/// Applies "a.b=value" to a config. The key must name a SystemConfig field.
inline SystemConfig apply_override(const SystemConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ValidationError(std::string(assignment), "override must have the form key=value");
    const std::string key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));
    double value = 0.0;
    std::size_t used = 0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw ValidationError(key, "override value '" + text + "' is not a number");

    json patch;
    const auto dot = key.find('.');
    if (dot == std::string::npos)
        patch[key] = value;
    else
        patch[key.substr(0, dot)][key.substr(dot + 1)] = value;
    return config_from_json(patch, config);
}

// Comment lines that head every artifact: tool version and resolved config.
inline void write_header(std::ostream& os, const SystemConfig& config, const std::vector<std::string>& extra = {}) {
    os << "# chiralent " << version << '\n';
    os << "# config: " << config_to_json(config).dump() << '\n';
    for (const auto& line : extra)
        os << "# " << line << '\n';
}

inline void write_trace_csv(std::ostream& os, std::span<const ReducedState> states) {
    os << "t,rho00,rho11,rho22,re_rho12,im_rho12,concurrence\n";
    for (const ReducedState& s : states)
        os << format_double(s.t) << ',' << format_double(s.rho00) << ',' << format_double(s.rho11) << ','
           << format_double(s.rho22) << ',' << format_double(s.rho12.real()) << ','
           << format_double(s.rho12.imag()) << ',' << format_double(concurrence(s)) << '\n';
}

inline void write_amplitude_csv(std::ostream& os, const AmplitudeTrace& tr) {
    os << "t,re_alpha1,im_alpha1,re_alpha2,im_alpha2,concurrence\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        os << format_double(tr.times[i]) << ',' << format_double(tr.alpha1[i].real()) << ','
           << format_double(tr.alpha1[i].imag()) << ',' << format_double(tr.alpha2[i].real()) << ','
           << format_double(tr.alpha2[i].imag()) << ','
           << format_double(concurrence_from_amplitudes(tr.alpha1[i], tr.alpha2[i])) << '\n';
}

// Branch + transmission and reflection.
inline void write_spectrum_csv(std::ostream& os, std::span<const SpectrumPoint> points) {
    os << "epsilon,re_t,im_t,re_r,im_r,flux_deficit\n";
    for (const SpectrumPoint& p : points)
        os << format_double(p.energy) << ',' << format_double(p.t_plus.real()) << ','
           << format_double(p.t_plus.imag()) << ',' << format_double(p.r_plus.real()) << ','
           << format_double(p.r_plus.imag()) << ',' << format_double(p.flux_deficit) << '\n';
}

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + '"';
}

inline void write_sweep_row(std::ostream& os, const SweepRecord& r, bool with_index) {
    if (with_index)
        os << r.index << ',';
    for (double x : r.coords)
        os << format_double(x) << ',';
    os << format_double(r.c_max) << ',' << format_double(r.t_star) << ',' << to_string(r.engine) << ','
       << csv_escape(r.status) << '\n';
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& result) {
    for (const auto& name : result.axis_names)
        os << name << ',';
    os << "c_max,t_star,engine,status\n";
    for (const SweepRecord& r : result.records)
        write_sweep_row(os, r, false);
}

inline json sweep_metadata(const SweepSpec& spec, const SweepResult& result) {
    std::size_t failures = 0;
    for (const auto& r : result.records)
        failures += r.status != "ok";
    json axes = json::array();
    for (const Axis& a : spec.axes)
        axes.push_back(json{{"name", a.name}, {"values", a.values}});
    const IntegratorTolerances ode;
    return json{{"tool", "chiralent"},
                {"version", std::string(version)},
                {"preset", std::string(to_string(spec.preset))},
                {"engine", std::string(to_string(spec.engine))},
                {"config_hash", result.config_hash},
                {"base_config", config_to_json(spec.fixed)},
                {"axes", axes},
                {"points", result.records.size()},
                {"failed_points", failures},
                {"tolerances",
                 {{"ode_absolute", ode.absolute},
                  {"ode_relative", ode.relative},
                  {"quadrature_convergence", spec.quad.tolerance},
                  {"completeness", spec.quad.completeness_tolerance},
                  {"max_overlap_condition", spec.quad.max_condition}}},
                {"assumptions",
                 {"fig4 presets place the qubits one wavelength apart (d = lambda0)",
                  "detuning is applied symmetrically, omega_{1,2} = omega_bar +/- delta/2",
                  "gamma_total = gamma_r + gamma_l of each qubit"}}};
}

// Checkpoint file of an interrupted sweep: a hash line, then one row per
// finished point prefixed with its grid index.
inline void write_checkpoint_header(std::ostream& os, const std::string& hash) { os << "# hash " << hash << '\n'; }

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace detail

/// Records from a checkpoint written for the same sweep (same hash). A
/// checkpoint of a different sweep, or a truncated last line, contributes
/// nothing for the affected rows.
inline std::vector<SweepRecord> read_checkpoint(std::istream& is, const std::string& hash, std::size_t n_axes) {
    std::vector<SweepRecord> out;
    std::string line;
    if (!std::getline(is, line) || line != "# hash " + hash)
        return out;
    while (std::getline(is, line)) {
        const auto f = detail::split_csv(line);
        if (f.size() != n_axes + 5)
            continue;
        try {
            SweepRecord r;
            r.index = std::stoull(f[0]);
            for (std::size_t k = 0; k < n_axes; ++k)
                r.coords.push_back(std::stod(f[1 + k]));
            r.c_max = std::stod(f[n_axes + 1]);
            r.t_star = std::stod(f[n_axes + 2]);
            r.engine = parse_engine(f[n_axes + 3]);
            r.status = f[n_axes + 4];
            out.push_back(std::move(r));
        } catch (const std::exception&) {
            continue;
        }
    }
    return out;
}

} // namespace chiralent
