// experiments.hpp - parameter sweeps of the maximum concurrence and engine comparison

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "chiralent/core.hpp"
#include "chiralent/format.hpp"
#include "chiralent/markovian.hpp"
#include "chiralent/scattering.hpp"

namespace chiralent {

enum class Engine { markovian, scattering, automatic };
enum class Preset { fig2a, fig2b, fig2c, fig3, fig4a, fig4b, fig4c, custom };

inline std::string_view to_string(Engine e) {
    switch (e) {
    case Engine::markovian: return "markovian";
    case Engine::scattering: return "scattering";
    case Engine::automatic: return "auto";
    }
    return "?";
}

inline Engine parse_engine(std::string_view s) {
    if (s == "markovian") return Engine::markovian;
    if (s == "scattering") return Engine::scattering;
    if (s == "auto") return Engine::automatic;
    throw ValidationError("engine", "unknown engine '" + std::string(s) + "' (expected markovian|scattering|auto)");
}

inline constexpr std::array<std::string_view, 8> preset_names{"fig2a", "fig2b", "fig2c", "fig3",
                                                              "fig4a", "fig4b", "fig4c", "custom"};

inline std::string_view to_string(Preset p) { return preset_names[static_cast<std::size_t>(p)]; }

inline Preset parse_preset(std::string_view s) {
    for (std::size_t i = 0; i < preset_names.size(); ++i)
        if (preset_names[i] == s)
            return static_cast<Preset>(i);
    throw ValidationError("preset", "unknown preset '" + std::string(s) + "'");
}

// `delta` sets both directionalities at once; `gamma_total` and `beta` act on
// both qubits.
inline constexpr std::array<std::string_view, 7> axis_names{"delta1", "delta2", "delta", "d_tilde",
                                                            "gamma_total", "detuning", "beta"};

struct Axis {
    std::string name;
    std::vector<double> values;
};

struct SweepSpec {
    Preset preset = Preset::custom;
    std::vector<Axis> axes;
    Engine engine = Engine::automatic;
    SystemConfig fixed;   // base configuration every grid point starts from
    QuadratureSpec quad;
    unsigned threads = 0; // 0: hardware concurrency
};

struct SweepRecord {
    std::size_t index = 0;
    std::vector<double> coords;
    double c_max = std::numeric_limits<double>::quiet_NaN();
    double t_star = std::numeric_limits<double>::quiet_NaN();
    Engine engine = Engine::markovian;
    std::string status = "ok";
};

struct SweepResult {
    std::vector<std::string> axis_names;
    std::vector<SweepRecord> records; // ordered by index
    std::string config_hash;
};

// The physical knobs a sweep axis can turn. A SystemConfig maps onto these
// and back without loss as long as both qubits are coupled.
struct PointTargets {
    double delta1 = 0.0, delta2 = 0.0;
    double beta1 = 1.0, beta2 = 1.0;
    double gamma_total1 = 0.0, gamma_total2 = 0.0; // gamma_r + gamma_l
    double d_tilde = 0.0;
    double detuning = 0.0;   // omega1 - omega2
    double mean_omega = 1.0;
    double x1 = 0.0;
    double v_g = 1.0;
    double omega0 = 1.0;
};

inline PointTargets targets_from_config(const SystemConfig& c) {
    const System s = validate(c);
    if (s.has_uncoupled_qubit())
        throw ValidationError("qubit", "sweeps need both qubits coupled to the waveguide");
    PointTargets t;
    t.delta1 = s.rates().delta[0];
    t.delta2 = s.rates().delta[1];
    t.beta1 = s.rates().beta[0];
    t.beta2 = s.rates().beta[1];
    t.gamma_total1 = c.qubit1.gamma_r + c.qubit1.gamma_l;
    t.gamma_total2 = c.qubit2.gamma_r + c.qubit2.gamma_l;
    t.d_tilde = s.d_tilde();
    t.detuning = s.detuning();
    t.mean_omega = s.mean_frequency();
    t.x1 = c.qubit1.position;
    t.v_g = c.v_g;
    t.omega0 = c.omega0;
    return t;
}

inline SystemConfig config_from_targets(const PointTargets& t) {
    SystemConfig c;
    c.v_g = t.v_g;
    c.omega0 = t.omega0;
    const Couplings k1 = couplings_from_targets(t.delta1, t.beta1, t.gamma_total1);
    const Couplings k2 = couplings_from_targets(t.delta2, t.beta2, t.gamma_total2);
    const double lambda0 = 2.0 * std::numbers::pi * t.v_g / t.omega0;
    c.qubit1 = {t.mean_omega + t.detuning / 2.0, k1.gamma_r, k1.gamma_l, k1.gamma_loss, t.x1};
    c.qubit2 = {t.mean_omega - t.detuning / 2.0, k2.gamma_r, k2.gamma_l, k2.gamma_loss, t.x1 + t.d_tilde * lambda0};
    return c;
}

inline void apply_axis(PointTargets& t, std::string_view name, double v) {
    if (name == "delta1") t.delta1 = v;
    else if (name == "delta2") t.delta2 = v;
    else if (name == "delta") t.delta1 = t.delta2 = v;
    else if (name == "d_tilde") t.d_tilde = v;
    else if (name == "gamma_total") t.gamma_total1 = t.gamma_total2 = v;
    else if (name == "detuning") t.detuning = v;
    else if (name == "beta") t.beta1 = t.beta2 = v;
    else throw ValidationError("axis", "unrecognized sweep parameter '" + std::string(name) + "'");
}

namespace detail {

// Real parts of the eigenvalues of the Markov-limit generator of the dual
// (gain) problem. If any is >= 0 the dual states carry a growing mode and the
// spectral resolution misses it.
inline bool dual_problem_is_damped(const System& s) {
    const MarkovCoefficients m(s);
    const cplx g1(s.rates().gamma[0] - 0.5 * s.qubit(0).gamma_loss, 0.5 * s.detuning());
    const cplx g2(s.rates().gamma[1] - 0.5 * s.qubit(1).gamma_loss, -0.5 * s.detuning());
    const cplx coupling = m.left * m.right * m.phase * m.phase;
    const cplx mean = 0.5 * (g1 + g2);
    const cplx root = std::sqrt(0.25 * (g1 - g2) * (g1 - g2) + coupling);
    return (mean - root).real() > 0.0 && (mean + root).real() > 0.0;
}

inline bool scattering_admissible(const System& s) {
    try {
        require_propagatable(s);
    } catch (const PreconditionError&) {
        return false;
    }
    return dual_problem_is_damped(s);
}

} // namespace detail

/// Resolves `auto`: the scattering engine whenever retardation is not
/// negligible (gamma d / v_g > 1e-3) or lossy emitters are detuned, provided
/// its spectral basis is complete; the master equation otherwise.
inline Engine select_engine(const System& s, Engine requested) {
    if (requested != Engine::automatic)
        return requested;
    const double g = std::max(s.rates().gamma[0], s.rates().gamma[1]);
    const bool retarded = g * s.separation() / s.v_g() > 1e-3;
    const bool lossy_detuned = std::min(s.rates().beta[0], s.rates().beta[1]) < 1.0 && s.detuning() != 0.0;
    if ((retarded || lossy_detuned) && detail::scattering_admissible(s))
        return Engine::scattering;
    return Engine::markovian;
}

inline PeakResult evaluate_cmax(const System& s, Engine engine, const QuadratureSpec& quad = {}) {
    if (engine == Engine::automatic)
        engine = select_engine(s, engine);
    return engine == Engine::markovian ? cmax_numeric(s) : cmax_scattering(s, std::nullopt, quad);
}

namespace detail {

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

inline std::vector<double> logspace(double a, double b, std::size_t n) {
    std::vector<double> v = linspace(std::log10(a), std::log10(b), n);
    for (double& x : v)
        x = std::pow(10.0, x);
    return v;
}

inline SystemConfig preset_base(double delta, double beta, double gamma, double d_tilde) {
    PointTargets t;
    t.delta1 = t.delta2 = delta;
    t.beta1 = t.beta2 = beta;
    t.gamma_total1 = t.gamma_total2 = 2.0 * gamma;
    t.d_tilde = d_tilde;
    return config_from_targets(t);
}

} // namespace detail

// gamma (= (gamma_r + gamma_l)/2) used by the fig4a preset. A 0.5 % frequency
// change corresponding to delta ~ 5 gamma fixes gamma ~ 1e-3 omega0.
inline constexpr double fig4a_gamma = 1e-3;

/// Grids and fixed parameters behind each figure. Fig. 2/3 presets are lossless
/// and evaluated with the master equation; Fig. 4 presets use D = 0.9,
/// beta = 0.98, d = lambda0 and let `auto` pick the engine.
inline SweepSpec preset_spec(Preset p) {
    SweepSpec s;
    s.preset = p;
    switch (p) {
    case Preset::fig2a:
    case Preset::fig2b:
        s.engine = Engine::markovian;
        s.fixed = detail::preset_base(p == Preset::fig2a ? 0.0 : 0.9, 1.0, 1e-3, 1.0);
        s.axes = {{"d_tilde", {0.125, 0.25, 0.375, 0.5, 0.75, 1.0}}};
        break;
    case Preset::fig2c:
        s.engine = Engine::markovian;
        s.fixed = detail::preset_base(0.0, 1.0, 1e-3, 1.0);
        s.axes = {{"delta", {0.0, 0.5, 0.9, 1.0}}, {"d_tilde", detail::linspace(0.0, 1.0, 101)}};
        break;
    case Preset::fig3:
        s.engine = Engine::markovian;
        s.fixed = detail::preset_base(0.0, 1.0, 1e-3, 1.0);
        s.axes = {{"delta1", detail::linspace(-1.0, 1.0, 81)}, {"delta2", detail::linspace(-1.0, 1.0, 81)}};
        break;
    case Preset::fig4a: {
        s.fixed = detail::preset_base(0.9, 0.98, fig4a_gamma, 1.0);
        std::vector<double> det = detail::logspace(1e-2, 1e2, 61);
        for (double& d : det)
            d *= fig4a_gamma;
        s.axes = {{"detuning", det}};
        break;
    }
    case Preset::fig4b: {
        s.fixed = detail::preset_base(0.9, 0.98, 1e-3, 1.0);
        std::vector<double> g = detail::logspace(1e-5, 0.2, 41);
        for (double& x : g)
            x *= 2.0;
        s.axes = {{"gamma_total", g}};
        break;
    }
    case Preset::fig4c:
        s.fixed = detail::preset_base(0.9, 0.98, 1e-3, 1.0);
        s.axes = {{"gamma_total", {2e-5, 2e-4, 2e-3, 2e-2}}, {"d_tilde", detail::logspace(0.5, 200.0, 61)}};
        break;
    case Preset::custom:
        s.fixed = detail::preset_base(0.9, 1.0, 1e-3, 1.0);
        break;
    }
    return s;
}

inline std::size_t grid_size(const SweepSpec& spec) {
    std::size_t n = 1;
    for (const Axis& a : spec.axes)
        n *= a.values.size();
    return n;
}

/// Coordinates of grid point `index`; the last axis varies fastest.
inline std::vector<double> grid_point(const SweepSpec& spec, std::size_t index) {
    std::vector<double> coords(spec.axes.size());
    for (std::size_t k = spec.axes.size(); k-- > 0;) {
        const std::size_t n = spec.axes[k].values.size();
        coords[k] = spec.axes[k].values[index % n];
        index /= n;
    }
    return coords;
}

inline SystemConfig point_config(const SweepSpec& spec, std::span<const double> coords) {
    PointTargets t = targets_from_config(spec.fixed);
    for (std::size_t k = 0; k < spec.axes.size(); ++k)
        apply_axis(t, spec.axes[k].name, coords[k]);
    return config_from_targets(t);
}

// Canonical text of everything that determines a sweep's numbers.
inline std::string canonical_description(const SweepSpec& spec) {
    std::string s = "preset=" + std::string(to_string(spec.preset)) + ";engine=" + std::string(to_string(spec.engine));
    auto qubit = [&](const char* name, const QubitParams& q) {
        s += std::string(";") + name + "=" + format_double(q.omega) + "," + format_double(q.gamma_r) + "," +
             format_double(q.gamma_l) + "," + format_double(q.gamma_loss) + "," + format_double(q.position);
    };
    qubit("qubit1", spec.fixed.qubit1);
    qubit("qubit2", spec.fixed.qubit2);
    s += ";v_g=" + format_double(spec.fixed.v_g) + ";omega0=" + format_double(spec.fixed.omega0);
    s += ";quad=" + (spec.quad.half_window ? format_double(*spec.quad.half_window) : std::string("default")) + "," +
         (spec.quad.intervals ? std::to_string(*spec.quad.intervals) : std::string("default")) + "," +
         format_double(spec.quad.tolerance);
    for (const Axis& a : spec.axes) {
        s += ";axis " + a.name + "=";
        for (double v : a.values)
            s += format_double(v) + ",";
    }
    return s;
}

inline std::string config_hash(const SweepSpec& spec) { return hash_hex(canonical_description(spec)); }

inline SweepRecord evaluate_point(const SweepSpec& spec, std::size_t index) {
    SweepRecord rec;
    rec.index = index;
    rec.coords = grid_point(spec, index);
    rec.engine = spec.engine == Engine::automatic ? Engine::markovian : spec.engine;
    try {
        const System sys = validate(point_config(spec, rec.coords));
        rec.engine = select_engine(sys, spec.engine);
        const PeakResult peak = evaluate_cmax(sys, rec.engine, spec.quad);
        rec.c_max = peak.c_max;
        rec.t_star = peak.t_star;
    } catch (const ValidationError& e) {
        rec.status = std::string("error[validation]: ") + e.what();
    } catch (const std::logic_error& e) {
        rec.status = std::string("error[precondition]: ") + e.what();
    } catch (const std::exception& e) {
        rec.status = std::string("error[numerical]: ") + e.what();
    }
    return rec;
}

struct SweepHooks {
    // Records already computed by an interrupted run; their indices are skipped.
    std::vector<SweepRecord> completed;
    // Called (serialized) for each newly computed record, in completion order.
    std::function<void(const SweepRecord&)> on_record;
};

/// Evaluates c_max on every grid point. Points are handed out dynamically to
/// a pool of workers; results are returned in index order and do not depend
/// on the number of threads.
inline SweepResult run_sweep(const SweepSpec& spec, const SweepHooks& hooks = {}) {
    for (const Axis& a : spec.axes) {
        if (std::find(axis_names.begin(), axis_names.end(), a.name) == axis_names.end())
            throw ValidationError("axis", "unrecognized sweep parameter '" + a.name + "'");
        if (a.values.empty())
            throw ValidationError("axis", "axis '" + a.name + "' has no values");
    }
    targets_from_config(spec.fixed); // validates the base configuration

    SweepResult result;
    result.config_hash = config_hash(spec);
    for (const Axis& a : spec.axes)
        result.axis_names.push_back(a.name);

    const std::size_t n = grid_size(spec);
    result.records.resize(n);
    std::vector<char> done(n, 0);
    for (const SweepRecord& r : hooks.completed) {
        if (r.index < n) {
            result.records[r.index] = r;
            done[r.index] = 1;
        }
    }
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < n; ++i)
        if (!done[i])
            todo.push_back(i);

    std::atomic<std::size_t> next{0};
    std::mutex callback_mutex;
    auto worker = [&] {
        for (std::size_t k = next.fetch_add(1); k < todo.size(); k = next.fetch_add(1)) {
            SweepRecord rec = evaluate_point(spec, todo[k]);
            if (hooks.on_record) {
                std::lock_guard lock(callback_mutex);
                hooks.on_record(rec);
            }
            result.records[todo[k]] = std::move(rec);
        }
    };
    unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(todo.size(), 1)));
    {
        std::vector<std::jthread> pool;
        for (unsigned i = 1; i < threads; ++i)
            pool.emplace_back(worker);
        worker();
    }
    return result;
}

struct EngineComparison {
    std::vector<double> times;
    std::vector<double> first, second; // concurrence traces
    std::vector<double> difference;    // |first - second|
    double sup_norm = 0.0;
};

inline EngineComparison compare_traces(std::span<const double> times, std::span<const double> first,
                                       std::span<const double> second) {
    if (first.size() != times.size() || second.size() != times.size())
        throw PreconditionError("compare_traces: traces must match the time grid");
    EngineComparison c;
    c.times.assign(times.begin(), times.end());
    c.first.assign(first.begin(), first.end());
    c.second.assign(second.begin(), second.end());
    for (std::size_t i = 0; i < times.size(); ++i) {
        c.difference.push_back(std::abs(first[i] - second[i]));
        c.sup_norm = std::max(c.sup_norm, c.difference.back());
    }
    return c;
}

inline std::vector<double> markovian_concurrence(const System& s, std::span<const double> t_grid) {
    const auto states = evolve(s, t_grid);
    std::vector<double> c(states.size());
    for (std::size_t i = 0; i < states.size(); ++i)
        c[i] = concurrence(states[i]);
    return c;
}

inline std::vector<double> scattering_concurrence(const System& s, std::span<const double> t_grid,
                                                  const QuadratureSpec& quad = {}) {
    const AmplitudeTrace tr = propagate(s, t_grid, quad);
    std::vector<double> c(tr.times.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = concurrence_from_amplitudes(tr.alpha1[i], tr.alpha2[i]);
    return c;
}

/// Markovian (`first`) versus scattering (`second`) concurrence on `t_grid`.
inline EngineComparison compare_engines(const System& s, std::span<const double> t_grid,
                                        const QuadratureSpec& quad = {}) {
    const auto markov = markovian_concurrence(s, t_grid);
    const auto exact = scattering_concurrence(s, t_grid, quad);
    return compare_traces(t_grid, markov, exact);
}

} // namespace chiralent
