// chiralent command-line tool: validate / simulate / spectrum / sweep / figures

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chiralent/experiments.hpp"
#include "chiralent/io.hpp"

namespace fs = std::filesystem;
using namespace chiralent;

namespace {

enum ExitCode { ok = 0, validation_failure = 1, numerical_failure = 2 };

struct ConfigOptions {
    std::string path;
    std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigOptions& opts) {
    cmd->add_option("--config", opts.path, "JSON file with SystemConfig fields");
    cmd->add_option("--set", opts.overrides, "override a field, e.g. qubit1.gamma_r=0.95 (repeatable)");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("config", "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// File first, then overrides, then validation by the caller.
SystemConfig resolve_config(const ConfigOptions& opts, SystemConfig base) {
    if (!opts.path.empty())
        base = config_from_json(parse_json_text(read_file(opts.path), opts.path), base);
    for (const auto& o : opts.overrides)
        base = apply_override(base, o);
    return base;
}

// Without --config the custom preset's system is the starting point.
SystemConfig default_config() { return preset_spec(Preset::custom).fixed; }

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ValidationError("out", "cannot write '" + path.string() + "'");
    return os;
}

std::vector<double> uniform_grid(double t_max, std::size_t samples) {
    if (!(t_max >= 0.0) || !std::isfinite(t_max))
        throw ValidationError("t-max", "must be a finite non-negative time");
    if (t_max == 0.0)
        return {0.0};
    if (samples < 2)
        throw ValidationError("samples", "need at least 2 samples");
    std::vector<double> t(samples);
    for (std::size_t i = 0; i < samples; ++i)
        t[i] = t_max * static_cast<double>(i) / static_cast<double>(samples - 1);
    return t;
}

double parse_number(const std::string& text, const std::string& field) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw ValidationError(field, "'" + text + "' is not a number");
    return v;
}

// name=v1,v2,...  |  name=start:stop:n  |  name=start:stop:n:log
Axis parse_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw ValidationError("axis", "expected name=values, got '" + text + "'");
    Axis axis{text.substr(0, eq), {}};
    const std::string body = text.substr(eq + 1);
    if (body.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(body);
        for (std::string p; std::getline(ss, p, ':');)
            parts.push_back(p);
        if (parts.size() < 3 || parts.size() > 4 || (parts.size() == 4 && parts[3] != "log"))
            throw ValidationError("axis", "range must be start:stop:n[:log]");
        const double a = parse_number(parts[0], "axis");
        const double b = parse_number(parts[1], "axis");
        const double n = parse_number(parts[2], "axis");
        if (!(n >= 1.0) || n != std::floor(n))
            throw ValidationError("axis", "point count must be a positive integer");
        if (parts.size() == 4 && !(a > 0.0 && b > 0.0))
            throw ValidationError("axis", "log ranges need positive bounds");
        axis.values = parts.size() == 4 ? detail::logspace(a, b, static_cast<std::size_t>(n))
                                        : detail::linspace(a, b, static_cast<std::size_t>(n));
    } else {
        std::stringstream ss(body);
        for (std::string p; std::getline(ss, p, ',');)
            axis.values.push_back(parse_number(p, "axis"));
    }
    return axis;
}

int cmd_validate(const ConfigOptions& opts) {
    const System s = validate(resolve_config(opts, default_config()));
    const auto& r = s.rates();
    auto line = [](const char* name, double v) { std::cout << name << " = " << format_double(v) << '\n'; };
    std::cout << "config: " << config_to_json(s.config()).dump() << '\n';
    line("delta1", r.delta[0]);
    line("delta2", r.delta[1]);
    line("beta1", r.beta[0]);
    line("beta2", r.beta[1]);
    line("gamma1", r.gamma[0]);
    line("gamma2", r.gamma[1]);
    line("q", r.q);
    line("lambda0", s.lambda0());
    line("d_tilde", s.d_tilde());
    line("detuning", s.detuning());
    return ok;
}

struct SimulateOptions {
    std::string engine = "auto";
    std::optional<double> t_max;
    std::size_t samples = 1001;
    std::string out = ".";
};

int cmd_simulate(const ConfigOptions& opts, const SimulateOptions& sim) {
    const System s = validate(resolve_config(opts, default_config()));
    const Engine engine = select_engine(s, parse_engine(sim.engine));
    const double t_max = sim.t_max.value_or(20.0 / std::min(s.rates().gamma[0] > 0 ? s.rates().gamma[0] : 1.0,
                                                           s.rates().gamma[1] > 0 ? s.rates().gamma[1] : 1.0));
    const auto grid = uniform_grid(t_max, sim.samples);
    const std::vector<std::string> extra{"engine: " + std::string(to_string(engine))};
    fs::path path;
    if (engine == Engine::markovian) {
        const auto states = evolve(s, grid);
        path = fs::path(sim.out) / "trace.csv";
        auto os = open_output(path);
        write_header(os, s.config(), extra);
        write_trace_csv(os, states);
    } else {
        const AmplitudeTrace tr = propagate(s, grid);
        path = fs::path(sim.out) / "amplitudes.csv";
        auto os = open_output(path);
        auto lines = extra;
        lines.push_back("quadrature: half_window=" + format_double(tr.grid.half_window) +
                        " intervals=" + std::to_string(tr.grid.intervals) +
                        " convergence_error=" + format_double(tr.convergence_error) +
                        " completeness_error=" + format_double(tr.completeness_error));
        write_header(os, s.config(), lines);
        write_amplitude_csv(os, tr);
    }
    std::cout << path.string() << '\n';
    return ok;
}

struct SpectrumOptions {
    std::optional<double> e_min, e_max;
    std::size_t points = 1001;
    std::string out = ".";
};

int cmd_spectrum(const ConfigOptions& opts, const SpectrumOptions& sp) {
    const System s = validate(resolve_config(opts, default_config()), {.allow_uncoupled = true});
    const double width = 10.0 * std::max({s.rates().gamma[0], s.rates().gamma[1], 1e-6}) +
                         std::abs(s.detuning());
    const double lo = sp.e_min.value_or(s.mean_frequency() - width);
    const double hi = sp.e_max.value_or(s.mean_frequency() + width);
    if (!(hi > lo))
        throw ValidationError("e-max", "energy window is empty");
    if (sp.points < 2)
        throw ValidationError("points", "need at least 2 energies");
    const auto energies = detail::linspace(lo, hi, sp.points);
    const auto spectrum = transmission_spectrum(s, energies);
    const fs::path path = fs::path(sp.out) / "spectrum.csv";
    auto os = open_output(path);
    write_header(os, s.config(), {"branch: + (incident from the left)"});
    write_spectrum_csv(os, spectrum);
    std::cout << path.string() << '\n';
    return ok;
}

// Runs (or resumes) a sweep and writes <name>.csv and <name>.json into `out`.
int run_and_write(const SweepSpec& spec, const fs::path& out, const std::string& name) {
    fs::create_directories(out);
    const std::string hash = config_hash(spec);
    const fs::path partial = out / (name + ".partial.csv");

    SweepHooks hooks;
    if (fs::exists(partial)) {
        std::ifstream in(partial);
        hooks.completed = read_checkpoint(in, hash, spec.axes.size());
        if (!hooks.completed.empty())
            std::cerr << "chiralent: resuming " << name << " with " << hooks.completed.size() << " finished points\n";
    }
    {
        // Rewrite the checkpoint so that stale or torn lines are dropped.
        auto os = open_output(partial);
        write_checkpoint_header(os, hash);
        for (const auto& r : hooks.completed)
            write_sweep_row(os, r, true);
    }
    std::ofstream checkpoint(partial, std::ios::app);
    hooks.on_record = [&](const SweepRecord& r) {
        write_sweep_row(checkpoint, r, true);
        checkpoint.flush();
    };
    const SweepResult result = run_sweep(spec, hooks);
    checkpoint.close();

    {
        auto os = open_output(out / (name + ".csv"));
        write_header(os, spec.fixed,
                     {"preset: " + std::string(to_string(spec.preset)), "engine: " + std::string(to_string(spec.engine)),
                      "config_hash: " + result.config_hash});
        write_sweep_csv(os, result);
    }
    {
        auto os = open_output(out / (name + ".json"));
        os << sweep_metadata(spec, result).dump(2) << '\n';
    }
    fs::remove(partial);

    std::size_t failures = 0;
    for (const auto& r : result.records)
        failures += r.status != "ok";
    std::cout << (out / (name + ".csv")).string() << '\n';
    if (failures)
        std::cerr << "chiralent: warning: " << failures << " of " << result.records.size()
                  << " points failed (see status column)\n";
    return ok;
}

struct SweepOptions {
    std::string preset = "custom";
    std::vector<std::string> axes;
    std::optional<std::string> engine;
    unsigned threads = 0;
    std::string out = ".";
    std::string name = "sweep";
};

int cmd_sweep(const ConfigOptions& opts, const SweepOptions& so) {
    SweepSpec spec = preset_spec(parse_preset(so.preset));
    spec.fixed = resolve_config(opts, spec.fixed);
    if (!so.axes.empty()) {
        spec.axes.clear();
        for (const auto& a : so.axes)
            spec.axes.push_back(parse_axis(a));
    }
    if (spec.axes.empty())
        throw ValidationError("axis", "a custom sweep needs at least one --axis");
    if (so.engine)
        spec.engine = parse_engine(*so.engine);
    spec.threads = so.threads;
    return run_and_write(spec, so.out, so.name);
}

// Fig. 2a/2b also come with the concurrence traces behind them.
void write_fig2_traces(const SweepSpec& spec, const fs::path& out) {
    for (double d : spec.axes.front().values) {
        PointTargets t = targets_from_config(spec.fixed);
        t.d_tilde = d;
        const System s = validate(config_from_targets(t));
        const auto grid = uniform_grid(20.0 / s.rates().gamma[0], 401);
        const auto states = evolve(s, grid);
        const fs::path path = out / (std::string(to_string(spec.preset)) + "_trace_dtilde_" + format_double(d) + ".csv");
        auto os = open_output(path);
        write_header(os, s.config(), {"engine: markovian"});
        write_trace_csv(os, states);
    }
}

struct FiguresOptions {
    std::string figure;
    std::optional<std::string> engine;
    unsigned threads = 0;
    std::string out = ".";
};

int cmd_figures(const FiguresOptions& fo) {
    std::vector<Preset> presets;
    if (fo.figure == "all") {
        for (auto p : {Preset::fig2a, Preset::fig2b, Preset::fig2c, Preset::fig3, Preset::fig4a, Preset::fig4b,
                       Preset::fig4c})
            presets.push_back(p);
    } else {
        const Preset p = parse_preset(fo.figure);
        if (p == Preset::custom)
            throw ValidationError("figure", "'custom' is not a figure; use the sweep subcommand");
        presets.push_back(p);
    }
    for (Preset p : presets) {
        SweepSpec spec = preset_spec(p);
        if (fo.engine)
            spec.engine = parse_engine(*fo.engine);
        spec.threads = fo.threads;
        run_and_write(spec, fo.out, std::string(to_string(p)));
        if (p == Preset::fig2a || p == Preset::fig2b)
            write_fig2_traces(spec, fo.out);
    }
    return ok;
}

int fail(const char* kind, const std::string& what, int code) {
    std::cerr << "chiralent: error[" << kind << "]: " << what << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement dynamics of two qubits chirally coupled to a waveguide"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    ConfigOptions validate_cfg, simulate_cfg, spectrum_cfg, sweep_cfg;
    SimulateOptions sim;
    SpectrumOptions spec;
    SweepOptions sweep;
    FiguresOptions figs;

    auto* v = app.add_subcommand("validate", "check a config and print derived quantities");
    add_config_options(v, validate_cfg);

    auto* s = app.add_subcommand("simulate", "concurrence trace of qubit-1 initial excitation");
    add_config_options(s, simulate_cfg);
    s->add_option("--engine", sim.engine, "markovian | scattering | auto");
    s->add_option("--t-max", sim.t_max, "final time (default 20 / min gamma_j)");
    s->add_option("--samples", sim.samples, "number of equally spaced times");
    s->add_option("--out", sim.out, "output directory");

    auto* p = app.add_subcommand("spectrum", "single-photon transmission and reflection");
    add_config_options(p, spectrum_cfg);
    p->add_option("--e-min", spec.e_min, "lowest photon energy");
    p->add_option("--e-max", spec.e_max, "highest photon energy");
    p->add_option("--points", spec.points, "number of energies");
    p->add_option("--out", spec.out, "output directory");

    auto* w = app.add_subcommand("sweep", "maximum concurrence over a parameter grid");
    add_config_options(w, sweep_cfg);
    w->add_option("--preset", sweep.preset, "starting preset (fig2a ... fig4c, custom)");
    w->add_option("--axis", sweep.axes, "name=v1,v2,... or name=start:stop:n[:log] (repeatable)");
    w->add_option("--engine", sweep.engine, "markovian | scattering | auto");
    w->add_option("--threads", sweep.threads, "worker threads (0: all cores)");
    w->add_option("--out", sweep.out, "output directory");
    w->add_option("--name", sweep.name, "output file stem");

    auto* f = app.add_subcommand("figures", "run a figure preset");
    f->add_option("figure", figs.figure, "fig2a | fig2b | fig2c | fig3 | fig4a | fig4b | fig4c | all")->required();
    f->add_option("--engine", figs.engine, "override the preset's engine");
    f->add_option("--threads", figs.threads, "worker threads (0: all cores)");
    f->add_option("--out", figs.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("validation", e.what(), validation_failure);
    }

    try {
        if (*v) return cmd_validate(validate_cfg);
        if (*s) return cmd_simulate(simulate_cfg, sim);
        if (*p) return cmd_spectrum(spectrum_cfg, spec);
        if (*w) return cmd_sweep(sweep_cfg, sweep);
        if (*f) return cmd_figures(figs);
    } catch (const ValidationError& e) {
        return fail("validation", e.what(), validation_failure);
    } catch (const DomainError& e) {
        return fail("validation", e.what(), validation_failure);
    } catch (const PreconditionError& e) {
        return fail("precondition", e.what(), numerical_failure);
    } catch (const NumericalError& e) {
        return fail("numerical", e.what(), numerical_failure);
    } catch (const fs::filesystem_error& e) {
        return fail("io", e.what(), validation_failure);
    } catch (const std::exception& e) {
        return fail("numerical", e.what(), numerical_failure);
    }
    return ok;
}
