// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "chiralent/experiments.hpp"
#include "chiralent/markovian.hpp"
#include "chiralent/scattering.hpp"
#include "../properties.hpp"

using namespace chiralent;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SystemConfig targets(double delta1, double delta2, double gamma, double d_tilde, double beta = 1.0,
                     double detuning = 0.0) {
    PointTargets t;
    t.delta1 = delta1;
    t.delta2 = delta2;
    t.gamma_total1 = t.gamma_total2 = 2.0 * gamma;
    t.beta1 = t.beta2 = beta;
    t.d_tilde = d_tilde;
    t.detuning = detuning;
    return config_from_targets(t);
}

Verdict chiral_maximum() {
    const double two_over_e = 2.0 / std::numbers::e;
    const double analytic = cmax_analytic(1.0, 1.0);
    const double numeric = cmax_numeric(validate(targets(1.0, 1.0, 1e-3, 1.0))).c_max;
    return {std::abs(analytic - two_over_e) < 1e-9 && std::abs(numeric - two_over_e) < 1e-5,
            fmt("analytic %.12f, numeric %.12f, 2/e %.12f", analytic, numeric, two_over_e)};
}

Verdict non_chiral_plateau() {
    const double g = 1e-3;
    const System s = validate(targets(0.0, 0.0, g, 1.0));
    const std::vector<double> grid = log_dense_grid(20.0 / g, 401);
    // Tolerances well below the 1e-12 decay bound being checked.
    const auto states = evolve(s, grid, InitialExcitation::qubit1, {.absolute = 1e-15, .relative = 1e-14});
    const double final_c = concurrence(states.back());
    double worst_drop = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] >= 2.0 / g)
            worst_drop = std::max(worst_drop, concurrence(states[i - 1]) - concurrence(states[i]));
    return {std::abs(final_c - 0.5) < 1e-4 && worst_drop <= 1e-12,
            fmt("C(gamma t = 20) = %.10f, largest decrease over the last decade %.2e", final_c, worst_drop)};
}

Verdict dead_channel() {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ud(-1.0, 1.0), ux(0.0, 3.0), ub(0.8, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const System s = validate(targets(-1.0, ud(rng), 1e-2, ux(rng), i % 2 ? ub(rng) : 1.0));
        const auto grid = log_dense_grid(2000.0, 200);
        for (const auto& st : evolve(s, grid))
            worst = std::max(worst, concurrence(st));
        if (i % 2 == 0)
            for (double t : grid)
                worst = std::max(worst, concurrence_analytic(validate(targets(-1.0, -1.0 + 0.1 * i, 1e-2, 0.3)), t));
    }
    return {worst <= 1e-12, fmt("max C over 20 configs = %.3e", worst)};
}

Verdict oracle_equivalence() {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> ud(-1.0, 1.0), ux(0.0, 2.0), ugt(0.0, 20.0);
    const double g = 0.01;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const System s = validate(targets(ud(rng), ud(rng), g, ux(rng)));
        const double t = ugt(rng) / g;
        const double ode = concurrence(evolve(s, std::vector<double>{0.0, t}).back());
        worst = std::max(worst, std::abs(ode - concurrence_analytic(s, t)));
    }
    return {worst < 1e-7, fmt("max |ODE - closed form| over 100 samples = %.3e", worst)};
}

Verdict completeness() {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> ud(0.2, 1.0), usign(0.0, 1.0), ug(0.01, 0.1), ux(0.1, 2.0), ub(0.9, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double d1 = ud(rng), d2 = (usign(rng) < 0.3 ? -1.0 : 1.0) * ud(rng);
        const System s = validate(targets(d1, d2, ug(rng), ux(rng), i % 2 ? ub(rng) : 1.0));
        const auto tr = propagate(s, std::vector<double>{0.0});
        worst = std::max(worst, std::hypot(std::abs(tr.alpha1[0] - 1.0), std::abs(tr.alpha2[0])));
    }
    return {worst < 1e-3, fmt("max |(alpha1, alpha2)(0) - (1, 0)| over 10 configs = %.3e", worst)};
}

Verdict markov_limit() {
    const double g = 1e-5;
    const System s = validate(targets(0.9, 0.9, g, 1.0));
    std::vector<double> t;
    for (int i = 0; i <= 200; ++i)
        t.push_back(i * 0.05 / g);
    const double sup = compare_engines(s, t).sup_norm;
    return {sup < 1e-2, fmt("sup-norm distance between engines = %.3e", sup)};
}

Verdict resonant_opacity() {
    SystemConfig c;
    c.qubit1 = {1.0, 0.05, 0.05, 0.0, 0.0};
    c.qubit2 = {1.0, 0.0, 0.0, 0.0, 1.0};
    const System non_chiral = validate(c, {.allow_uncoupled = true});
    const double t_res = std::abs(solve_eigenstate(non_chiral, 1.0, Branch::plus).c);
    c.qubit1 = {1.0, 0.1, 0.0, 0.0, 0.0};
    const System chiral = validate(c, {.allow_uncoupled = true});
    std::vector<double> energies;
    for (int i = 0; i <= 2000; ++i)
        energies.push_back(0.5 + i / 2000.0);
    double dev_t = 0.0, max_r = 0.0;
    for (const auto& p : transmission_spectrum(chiral, energies)) {
        dev_t = std::max(dev_t, std::abs(std::abs(p.t_plus) - 1.0));
        max_r = std::max(max_r, std::abs(p.r_plus));
    }
    return {t_res < 1e-10 && dev_t < 1e-10 && max_r < 1e-10,
            fmt("non-chiral |t(Omega)| = %.2e; chiral max ||t| - 1| = %.2e, max |r| = %.2e", t_res, dev_t, max_r)};
}

Verdict strong_coupling() {
    const System s = validate(targets(0.9, 0.9, 0.1, 1.0, 0.98));
    const PeakResult p = cmax_scattering(s);
    const double markov = cmax_numeric(s).c_max;
    return {p.c_max > 0.6, fmt("scattering C_max = %.4f at t = %.3f (master equation: %.4f)", p.c_max, p.t_star,
                               markov)};
}

// Largest detuning (in units of gamma) for which `pred(C_max)` still holds,
// by bisection in log(delta / gamma) on [lo, hi].
double detuning_threshold(double delta, double gamma, const std::function<bool(double)>& pred, double lo,
                          double hi) {
    auto cmax = [&](double ratio) {
        const System s = validate(targets(delta, delta, gamma, 1.0, 0.98, ratio * gamma));
        return evaluate_cmax(s, Engine::automatic).c_max;
    };
    if (!pred(cmax(lo)))
        return 0.0;
    if (pred(cmax(hi)))
        return hi;
    for (int it = 0; it < 30; ++it) {
        const double mid = std::sqrt(lo * hi);
        (pred(cmax(mid)) ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
}

Verdict detuning_robustness() {
    const double g = fig4a_gamma;
    auto plateau = [&](double delta) {
        const double c0 = evaluate_cmax(validate(targets(delta, delta, g, 1.0, 0.98)), Engine::automatic).c_max;
        return detuning_threshold(delta, g, [c0](double c) { return c >= 0.99 * c0; }, 1e-3, 100.0);
    };
    const double w_chiral = plateau(0.9);
    const double w_plain = plateau(0.0);
    const double ratio = w_chiral / w_plain;
    const double half = detuning_threshold(0.9, g, [](double c) { return c >= 0.5; }, 1e-2, 100.0);
    const bool ratio_ok = std::abs(ratio - 5.0) <= 0.3 * 5.0;
    const bool half_ok = half >= 2.5 && half <= 10.0;
    return {ratio_ok && half_ok,
            fmt("plateau (1%% drop) width: D=0.9 %.3f gamma, D=0 %.3f gamma, ratio %.2f (want 5 +/- 30%%) [%s]; "
                "C_max = 0.5 reached at delta = %.2f gamma (want 2.5..10) [%s]",
                w_chiral, w_plain, ratio, ratio_ok ? "ok" : "off", half, half_ok ? "ok" : "off")};
}

Verdict property_suite() {
    properties::Outcome o;
    properties::trace_and_bounds(o, 200);
    properties::flux(o, 400);
    properties::half_period(o, 300);
    properties::exchange(o, 100);
    properties::parallel_determinism(o, 5);
    std::string detail = fmt("%d cases, %zu failures", o.cases, o.failures.size());
    if (!o.failures.empty())
        detail += "; first: " + o.failures.front();
    return {o.cases >= 1000 && o.failures.empty(), detail};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        Verdict (*run)();
    };
    const Criterion criteria[] = {
        {1, "chiral maximum 2/e", chiral_maximum},
        {2, "non-chiral plateau C = 0.5", non_chiral_plateau},
        {3, "dead channel D1 = -1", dead_channel},
        {4, "ODE vs closed form", oracle_equivalence},
        {5, "completeness U(0) = 1", completeness},
        {6, "Markov limit engine agreement", markov_limit},
        {7, "resonant opacity / chiral transparency", resonant_opacity},
        {8, "strong-coupling robustness C_max > 0.6", strong_coupling},
        {9, "detuning robustness factor", detuning_robustness},
        {10, "property suite", property_suite},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %2d %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !v.pass;
    }
    std::printf("%d of 10 criteria passed\n", 10 - failed);
    return failed;
}
