// markovian.hpp - Markovian (master-equation) dynamics of the two chiral qubits
//
// With qubit 1 initially excited, the only nonzero density-matrix elements
// are rho00, rho11, rho22 and the coherence rho12 = <1|rho|2>. Their
// equations of motion (rotating frame at the mean qubit frequency) are
//
//   d rho11/dt = -(2 g1 + G1) rho11 - sqrt(g1L g2L) (e^{i phi} rho21 + e^{-i phi} rho12)
//   d rho22/dt = -(2 g2 + G2) rho22 - sqrt(g1R g2R) (e^{i phi} rho12 + e^{-i phi} rho21)
//   d rho12/dt = -(g1 + g2 + (G1 + G2)/2 + i delta) rho12
//                - sqrt(g1R g2R) rho11 e^{-i phi} - sqrt(g1L g2L) rho22 e^{i phi}
//
// with phi = 2 pi d/lambda0, g_j = (g_jR + g_jL)/2, G_j the loss rates and
// delta = omega1 - omega2. The Wootters concurrence of these X-states is
// 2 |rho12|.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "chiralent/core.hpp"
#include "chiralent/peak_search.hpp"

namespace chiralent {

struct ReducedState {
    double t = 0.0;
    double rho00 = 0.0;
    double rho11 = 0.0;
    double rho22 = 0.0;
    std::complex<double> rho12{};
};

enum class InitialExcitation { qubit1, qubit2 };

struct IntegratorTolerances {
    double absolute = 1e-12;
    double relative = 1e-10;
};

struct ConcurrenceTrace {
    std::vector<double> times;
    std::vector<double> values;
    double c_max = 0.0;
    double t_star = 0.0;
};

namespace detail {

using MarkovVector = std::array<double, 5>; // rho00, rho11, rho22, Re rho12, Im rho12

inline MarkovVector pack(const ReducedState& s) {
    return {s.rho00, s.rho11, s.rho22, s.rho12.real(), s.rho12.imag()};
}

inline ReducedState unpack(const MarkovVector& x, double t) {
    return {t, x[0], x[1], x[2], {x[3], x[4]}};
}

// Coefficients of the reduced equations, computed once per System.
struct MarkovCoefficients {
    double decay1 = 0.0;             // 2 g1 + G1
    double decay2 = 0.0;             // 2 g2 + G2
    std::complex<double> coherence;  // g1 + g2 + (G1 + G2)/2 + i delta
    double left = 0.0;               // sqrt(g1L g2L)
    double right = 0.0;              // sqrt(g1R g2R)
    std::complex<double> phase;      // e^{i 2 pi d~}

    explicit MarkovCoefficients(const System& s) {
        const QubitParams& a = s.qubit(0);
        const QubitParams& b = s.qubit(1);
        decay1 = a.gamma_r + a.gamma_l + a.gamma_loss;
        decay2 = b.gamma_r + b.gamma_l + b.gamma_loss;
        coherence = {0.5 * (decay1 + decay2), s.detuning()};
        left = std::sqrt(a.gamma_l * b.gamma_l);
        right = std::sqrt(a.gamma_r * b.gamma_r);
        // Reduce 2 d~ modulo 2 first so that phase factors for d~ and d~ + 1
        // are bit-identical.
        const double two_d = 2.0 * s.d_tilde();
        const double reduced = two_d - 2.0 * std::floor(two_d / 2.0);
        phase = std::polar(1.0, std::numbers::pi * reduced);
    }

    void operator()(const MarkovVector& x, MarkovVector& dxdt, double /*t*/) const {
        const std::complex<double> rho12{x[3], x[4]};
        const std::complex<double> ephi_c = std::conj(phase);
        // e^{i phi} rho21 + e^{-i phi} rho12 = 2 Re(e^{-i phi} rho12)
        const double d11 = -decay1 * x[1] - left * 2.0 * (ephi_c * rho12).real();
        const double d22 = -decay2 * x[2] - right * 2.0 * (phase * rho12).real();
        const std::complex<double> d12 = -coherence * rho12 - right * x[1] * ephi_c - left * x[2] * phase;
        dxdt[0] = -(d11 + d22);
        dxdt[1] = d11;
        dxdt[2] = d22;
        dxdt[3] = d12.real();
        dxdt[4] = d12.imag();
    }
};

inline ReducedState initial_state(InitialExcitation which) {
    ReducedState s;
    if (which == InitialExcitation::qubit1)
        s.rho11 = 1.0;
    else
        s.rho22 = 1.0;
    return s;
}

inline double initial_step(const System& s) {
    const double fastest = std::max({s.qubit(0).gamma_r + s.qubit(0).gamma_l + s.qubit(0).gamma_loss,
                                     s.qubit(1).gamma_r + s.qubit(1).gamma_l + s.qubit(1).gamma_loss,
                                     std::abs(s.detuning()), 1e-300});
    return 1e-3 / fastest;
}

inline void check_physical(const ReducedState& st, double tol) {
    const double trace = st.rho00 + st.rho11 + st.rho22;
    if (!std::isfinite(trace) || !std::isfinite(std::abs(st.rho12)))
        throw NumericalError("evolve: non-finite state at t = " + std::to_string(st.t));
    if (std::abs(trace - 1.0) > tol)
        throw NumericalError("evolve: trace drifted to " + std::to_string(trace) +
                             " at t = " + std::to_string(st.t));
    if (st.rho11 < -tol || st.rho22 < -tol || std::norm(st.rho12) > st.rho11 * st.rho22 + tol)
        throw NumericalError("evolve: positivity violated at t = " + std::to_string(st.t));
}

// Integrates from `from` to time `t` with an adaptive controlled stepper.
inline ReducedState integrate_to(const System& s, const ReducedState& from, double t,
                                 IntegratorTolerances tol = {}) {
    namespace odeint = boost::numeric::odeint;
    MarkovVector x = pack(from);
    if (t == from.t)
        return from;
    const MarkovCoefficients rhs(s);
    try {
        odeint::integrate_adaptive(
            odeint::make_controlled(tol.absolute, tol.relative, odeint::runge_kutta_dopri5<MarkovVector>()),
            rhs, x, from.t, t, std::min(initial_step(s), t - from.t));
    } catch (const odeint::odeint_error& e) {
        throw NumericalError(std::string("integrator step failure: ") + e.what());
    }
    return unpack(x, t);
}

} // namespace detail

/// Time derivative of the reduced state. The returned `t` is the input time.
inline ReducedState master_rhs(const ReducedState& state, const System& system) {
    const detail::MarkovCoefficients rhs(system);
    detail::MarkovVector dx{};
    rhs(detail::pack(state), dx, state.t);
    return detail::unpack(dx, state.t);
}

/// Integrates the reduced master equation and samples it on `t_grid`, which
/// must start at 0 and be non-decreasing.
inline std::vector<ReducedState> evolve(const System& system, std::span<const double> t_grid,
                                        InitialExcitation excited = InitialExcitation::qubit1,
                                        IntegratorTolerances tol = {}) {
    namespace odeint = boost::numeric::odeint;
    if (t_grid.empty())
        return {};
    if (t_grid.front() != 0.0)
        throw PreconditionError("evolve: time grid must start at t = 0");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw PreconditionError("evolve: time grid must be non-decreasing");

    std::vector<ReducedState> out;
    out.reserve(t_grid.size());
    detail::MarkovVector x = detail::pack(detail::initial_state(excited));
    const detail::MarkovCoefficients rhs(system);
    try {
        auto stepper = odeint::make_dense_output(tol.absolute, tol.relative,
                                                 odeint::runge_kutta_dopri5<detail::MarkovVector>());
        odeint::integrate_times(stepper, rhs, x, t_grid.begin(), t_grid.end(), detail::initial_step(system),
                                [&](const detail::MarkovVector& v, double t) { out.push_back(detail::unpack(v, t)); },
                                odeint::max_step_checker(1000000));
    } catch (const odeint::odeint_error& e) {
        throw NumericalError(std::string("evolve: integrator step failure: ") + e.what());
    }
    for (const ReducedState& st : out)
        detail::check_physical(st, 1e-8);
    return out;
}

/// 2 |rho12|, clipped to [0, 1].
inline double concurrence(const ReducedState& state) {
    return std::clamp(2.0 * std::abs(state.rho12), 0.0, 1.0);
}

inline ConcurrenceTrace concurrence_trace(std::span<const ReducedState> states) {
    ConcurrenceTrace tr;
    tr.times.reserve(states.size());
    tr.values.reserve(states.size());
    for (const ReducedState& s : states) {
        tr.times.push_back(s.t);
        tr.values.push_back(concurrence(s));
    }
    if (!tr.values.empty()) {
        const auto best = std::max_element(tr.values.begin(), tr.values.end()) - tr.values.begin();
        tr.c_max = tr.values[best];
        tr.t_star = tr.times[best];
    }
    return tr;
}

// Arguments below this use the Taylor series of sin(x)/x and sinh(x)/x.
inline constexpr double q_switch = 1e-3;

namespace detail {

inline double sinc(double x) {
    const double x2 = x * x;
    if (std::abs(x) < q_switch)
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    return std::sin(x) / x;
}

// e^{-y} sinh(x) / x for 0 <= x <= y, without overflow at large y.
inline double damped_sinhc(double x, double y) {
    if (x < q_switch) {
        const double x2 = x * x;
        return std::exp(-y) * (1.0 + x2 / 6.0 * (1.0 + x2 / 20.0));
    }
    return 0.5 * (std::exp(x - y) - std::exp(-x - y)) / x;
}

} // namespace detail

/// Closed-form concurrence for equally coupled, lossless, resonant qubits:
///
///   C^2 = (1 + D1)(1 + D2) e^{-4 g t} F / q^2,
///   F   = sin^2[2 q g t sin(2 pi d~)] + sinh^2[2 q g t cos(2 pi d~)],
///
/// evaluated through sin(x)/x and sinh(x)/x so that the q -> 0 limit
/// (|D_j| = 1) is exact.
inline double concurrence_analytic(const System& system, double t) {
    const DerivedRates& r = system.rates();
    const double g = r.gamma[0];
    if (std::abs(r.gamma[0] - r.gamma[1]) > 1e-12 * std::max(r.gamma[0], r.gamma[1]))
        throw PreconditionError("concurrence_analytic requires equal couplings gamma1 == gamma2; use evolve");
    if (system.qubit(0).gamma_loss != 0.0 || system.qubit(1).gamma_loss != 0.0)
        throw PreconditionError("concurrence_analytic requires beta = 1 (no losses); use evolve");
    if (std::abs(system.detuning()) > 1e-12 * system.omega0())
        throw PreconditionError("concurrence_analytic requires identical qubit frequencies; use evolve");
    if (!(t >= 0.0))
        throw PreconditionError("concurrence_analytic requires t >= 0");

    const double prefactor = (1.0 + r.delta[0]) * (1.0 + r.delta[1]);
    if (prefactor == 0.0 || t == 0.0 || g == 0.0)
        return 0.0;

    // Only |sin| and |cos| of 2 pi d~ enter; both are functions of 2 d~ mod 1.
    const double two_d = 2.0 * system.d_tilde();
    const double angle = std::numbers::pi * (two_d - std::floor(two_d));
    const double gt2 = 2.0 * g * t;
    const double a = gt2 * std::abs(std::sin(angle));
    const double b = gt2 * std::abs(std::cos(angle));
    const double q = r.q;

    const double u = std::exp(-gt2) * a * detail::sinc(q * a);
    const double v = b * detail::damped_sinhc(q * b, gt2);
    return std::clamp(std::sqrt(prefactor) * std::hypot(u, v), 0.0, 1.0);
}

/// Maximum concurrence at the optimal separations 2 d~ = 0, 1, 2, ...:
///
///   C_max^2 = (1 + D1)(1 + D2) / (1 - q^2) * ((1 - q)/(1 + q))^{1/q}.
inline double cmax_analytic(double delta1, double delta2) {
    if (!(std::abs(delta1) <= 1.0) || !(std::abs(delta2) <= 1.0))
        throw DomainError("cmax_analytic: directionalities must lie in [-1, 1]");
    const double prefactor = (1.0 + delta1) * (1.0 + delta2);
    if (prefactor == 0.0)
        return 0.0;
    const double q = std::sqrt(std::sqrt((1.0 - delta1) * (1.0 + delta1) * (1.0 - delta2) * (1.0 + delta2)));
    // ln C^2 = ln P + [(1 - q) ln(1 - q) - (1 + q) ln(1 + q)] / q
    double log_factor;
    if (q < 1e-4) {
        log_factor = -2.0 - q * q / 3.0;
    } else {
        const double lm = q < 1.0 ? (1.0 - q) * std::log1p(-q) : 0.0;
        log_factor = (lm - (1.0 + q) * std::log1p(q)) / q;
    }
    return std::sqrt(prefactor) * std::exp(0.5 * log_factor);
}

/// Numerical maximum of the master-equation concurrence over [0, horizon].
/// The default horizon is 20 / min_j gamma_j.
inline PeakResult cmax_numeric(const System& system, std::optional<double> t_horizon = std::nullopt,
                               std::size_t coarse_points = 2048, IntegratorTolerances tol = {}) {
    double horizon;
    if (t_horizon) {
        horizon = *t_horizon;
    } else {
        const DerivedRates& r = system.rates();
        double g_min = std::min(r.gamma[0], r.gamma[1]);
        if (g_min <= 0.0)
            g_min = std::max(r.gamma[0], r.gamma[1]);
        if (g_min <= 0.0)
            g_min = system.slowest_decay();
        if (g_min <= 0.0)
            throw PreconditionError("cmax_numeric: both qubits are uncoupled");
        horizon = 20.0 / g_min;
    }
    if (!(horizon > 0.0))
        throw PreconditionError("cmax_numeric: horizon must be positive");

    const std::vector<double> grid = log_dense_grid(horizon, coarse_points);
    const std::vector<ReducedState> states = evolve(system, grid, InitialExcitation::qubit1, tol);
    std::vector<double> values(states.size());
    for (std::size_t i = 0; i < states.size(); ++i)
        values[i] = concurrence(states[i]);

    const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
    const ReducedState& anchor = states[best == 0 ? 0 : best - 1];
    return refine_peak([&](double t) { return concurrence(detail::integrate_to(system, anchor, t, tol)); },
                       grid, values);
}

} // namespace chiralent
