// scattering.hpp - exact single-excitation dynamics from real-space scattering eigenstates
//
// The photon field of an eigenstate of energy eps is a plane wave in each of
// the three regions cut by the emitters,
//
//   phi_R(x) = e^{i k x} {A, B, C},   phi_L(x) = e^{-i k x} {D, E, F},   k = eps / v_g,
//
// for x < x1, x1 < x < x2 and x > x2. Branch + is incident from the left
// (A = 1, F = 0), branch - from the right (F = 1, A = 0). Integrating the
// first-order field equations across each delta coupling gives one jump
// condition per chirality per emitter; the emitter equations use the mean of
// the one-sided field values. Couplings are V_ja = sqrt(gamma_ja v_g) and
// losses enter as complex frequencies Omega_j - i Gamma_j / 2.
//
// Time evolution of qubit 1's excitation uses the spectral resolution
//
//   U(t) = 1/(2 pi v_g) sum_ik Int d eps e^{-i eps t} |eps_i> (S^-1)_ik <~eps_k|
//
// where <~eps_k| are the dual states (solutions with Omega_j + i Gamma_j / 2)
// and S_ik = lim <~eps_i|eps_k> / L. Without losses the dual states are the
// eigenstates themselves.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chiralent/core.hpp"
#include "chiralent/peak_search.hpp"

namespace chiralent {

using cplx = std::complex<double>;

enum class Branch { plus, minus };

inline const char* to_string(Branch b) { return b == Branch::plus ? "+" : "-"; }

struct ScatteringEigenstate {
    double energy = 0.0;
    Branch branch = Branch::plus;
    // Plane-wave coefficients: right-movers a, b, c and left-movers d, e, f
    // in the regions x < x1, x1 < x < x2, x > x2.
    cplx a, b, c, d, e, f;
    cplx alpha1, alpha2;
    double residual = 0.0; // relative residual of the linear solve
};

struct OverlapMatrix {
    Eigen::Matrix2cd entries;
    double condition_number = 1.0;
};

struct LocalizedStateCheck {
    bool exists = false;
    std::string diagnostic;
};

struct SpectrumPoint {
    double energy = 0.0;
    cplx t_plus, r_plus;   // (C, D) of branch +
    cplx t_minus, r_minus; // (D, C) of branch -
    double flux_deficit = 0.0; // 1 - |t+|^2 - |r+|^2
};

namespace detail {

// Per-length overlap of two states at the same energy. Only co-propagating
// products of the asymptotic plane waves survive L -> infinity, each
// half-line carrying half the weight.
inline cplx asymptotic_overlap(const ScatteringEigenstate& bra, const ScatteringEigenstate& ket) {
    return 0.5 * (std::conj(bra.a) * ket.a + std::conj(bra.d) * ket.d +
                  std::conj(bra.c) * ket.c + std::conj(bra.f) * ket.f);
}

inline std::array<cplx, 2> lossy_frequencies(const System& s) {
    return {cplx(s.qubit(0).omega, -0.5 * s.qubit(0).gamma_loss),
            cplx(s.qubit(1).omega, -0.5 * s.qubit(1).gamma_loss)};
}

inline std::array<cplx, 2> dual_frequencies(const System& s) {
    return {cplx(s.qubit(0).omega, 0.5 * s.qubit(0).gamma_loss),
            cplx(s.qubit(1).omega, 0.5 * s.qubit(1).gamma_loss)};
}

using Matrix6 = Eigen::Matrix<cplx, 6, 6>;
using Vector6 = Eigen::Matrix<cplx, 6, 1>;

// Linear system M x = rhs for x = (B, C, D, E, alpha1, alpha2) at given
// incident amplitudes A and F. With A = F = 0 it is the bound-state problem.
inline void assemble(const System& s, double energy, std::array<cplx, 2> omega, cplx A, cplx F,
                     Matrix6& m, Vector6& rhs) {
    const double vg = s.v_g();
    const double k = energy / vg;
    const cplx p1 = std::polar(1.0, k * s.qubit(0).position);
    const cplx p2 = std::polar(1.0, k * s.qubit(1).position);
    const double v1r = std::sqrt(s.qubit(0).gamma_r * vg), v1l = std::sqrt(s.qubit(0).gamma_l * vg);
    const double v2r = std::sqrt(s.qubit(1).gamma_r * vg), v2l = std::sqrt(s.qubit(1).gamma_l * vg);
    const cplx i(0.0, 1.0);
    enum { B, C, D, E, A1, A2 };

    m.setZero();
    rhs.setZero();
    // right-mover jump at x1 and x2
    m(0, B) = p1;
    m(0, A1) = i * v1r / vg;
    rhs(0) = A * p1;
    m(1, C) = p2;
    m(1, B) = -p2;
    m(1, A2) = i * v2r / vg;
    // left-mover jump at x1 and x2
    m(2, E) = 1.0 / p1;
    m(2, D) = -1.0 / p1;
    m(2, A1) = -i * v1l / vg;
    m(3, E) = -1.0 / p2;
    m(3, A2) = -i * v2l / vg;
    rhs(3) = -F / p2;
    // emitter equations
    if (v1r == 0.0 && v1l == 0.0) {
        m(4, A1) = 1.0;
    } else {
        m(4, A1) = energy - omega[0];
        m(4, B) = -0.5 * v1r * p1;
        m(4, D) = -0.5 * v1l / p1;
        m(4, E) = -0.5 * v1l / p1;
        rhs(4) = 0.5 * v1r * p1 * A;
    }
    if (v2r == 0.0 && v2l == 0.0) {
        m(5, A2) = 1.0;
    } else {
        m(5, A2) = energy - omega[1];
        m(5, B) = -0.5 * v2r * p2;
        m(5, C) = -0.5 * v2r * p2;
        m(5, E) = -0.5 * v2l / p2;
        rhs(5) = 0.5 * v2l * F / p2;
    }
}

inline ScatteringEigenstate solve_with_frequencies(const System& s, double energy, Branch branch,
                                                   std::array<cplx, 2> omega) {
    const cplx A = branch == Branch::plus ? 1.0 : 0.0;
    const cplx F = branch == Branch::plus ? 0.0 : 1.0;
    Matrix6 m;
    Vector6 rhs;
    assemble(s, energy, omega, A, F, m, rhs);

    const Eigen::PartialPivLU<Matrix6> lu(m);
    if (!(lu.rcond() > 1e-14))
        throw SingularSystemError("scattering system is singular at energy " + std::to_string(energy) +
                                  ": a localized resonance sits here (see localized_state_exists)");
    const Vector6 x = lu.solve(rhs);
    const double scale = m.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff() + rhs.cwiseAbs().maxCoeff();

    ScatteringEigenstate st;
    st.energy = energy;
    st.branch = branch;
    st.a = A;
    st.b = x(0);
    st.c = x(1);
    st.d = x(2);
    st.e = x(3);
    st.f = F;
    st.alpha1 = x(4);
    st.alpha2 = x(5);
    st.residual = (m * x - rhs).cwiseAbs().maxCoeff() / scale;
    if (!std::isfinite(st.residual))
        throw NumericalError("scattering solve produced non-finite coefficients at energy " + std::to_string(energy));
    return st;
}

// Two singular values of a 2x2 complex matrix, largest first.
inline std::array<double, 2> singular_values(const Eigen::Matrix2cd& m) {
    const double fro2 = m.squaredNorm();
    const double det = std::abs(m.determinant());
    const double disc = std::sqrt(std::max(0.0, fro2 * fro2 - 4.0 * det * det));
    const double s1 = std::sqrt(0.5 * (fro2 + disc));
    const double s2 = s1 > 0.0 ? det / s1 : 0.0;
    return {s1, s2};
}

inline double condition_number(const Eigen::Matrix2cd& m) {
    const auto sv = singular_values(m);
    return sv[1] > 0.0 ? sv[0] / sv[1] : std::numeric_limits<double>::infinity();
}

inline Eigen::Matrix2cd overlap(const std::array<ScatteringEigenstate, 2>& bras,
                                const std::array<ScatteringEigenstate, 2>& kets) {
    Eigen::Matrix2cd s;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            s(i, k) = asymptotic_overlap(bras[i], kets[k]);
    return s;
}

// Fabry-Perot order 2 d Omega / (2 pi v_g) for the mean qubit frequency.
inline double fabry_perot_order(const System& s) {
    return 2.0 * s.separation() * s.mean_frequency() / (2.0 * std::numbers::pi * s.v_g());
}

inline double relative_asymmetry(const QubitParams& q) {
    const double total = q.gamma_r + q.gamma_l;
    return total > 0.0 ? std::abs(q.gamma_r - q.gamma_l) / total : 0.0;
}

} // namespace detail

/// Scattering eigenstate at real energy `energy`, losses included as
/// complex emitter frequencies.
inline ScatteringEigenstate solve_eigenstate(const System& system, double energy, Branch branch) {
    return detail::solve_with_frequencies(system, energy, branch, detail::lossy_frequencies(system));
}

/// True only when both emitters are coupled and non-chiral, have identical
/// frequencies, and sit at a Fabry-Perot separation 2 d / lambda = 0, 1, 2, ...
inline LocalizedStateCheck localized_state_exists(const System& system, double tolerance = 1e-9) {
    for (int j = 0; j < 2; ++j) {
        const QubitParams& q = system.qubit(j);
        const std::string name = "qubit " + std::to_string(j + 1);
        if (q.gamma_r + q.gamma_l == 0.0)
            return {false, name + " is not coupled to the waveguide"};
        if (detail::relative_asymmetry(q) > tolerance)
            return {false, name + " is chiral (gamma_r != gamma_l)"};
    }
    const double w1 = system.qubit(0).omega, w2 = system.qubit(1).omega;
    if (std::abs(w1 - w2) > tolerance * std::max(w1, w2))
        return {false, "qubit frequencies differ"};
    const double order = detail::fabry_perot_order(system);
    if (std::abs(order - std::round(order)) > tolerance)
        return {false, "separation is off the Fabry-Perot condition (2d/lambda = " + std::to_string(order) + ")"};
    return {true, "non-chiral identical emitters at 2d/lambda = " + std::to_string(std::lround(order)) +
                      ": a photon can be trapped between them"};
}

/// S_ij = lim <eps_i|eps_j> / L for the two branches at `energy`.
inline OverlapMatrix overlap_matrix(const System& system, double energy) {
    if (const auto loc = localized_state_exists(system); loc.exists)
        throw PreconditionError("overlap_matrix: scattering states do not form a complete basis (" +
                                loc.diagnostic + ")");
    const std::array<ScatteringEigenstate, 2> states{solve_eigenstate(system, energy, Branch::plus),
                                                     solve_eigenstate(system, energy, Branch::minus)};
    OverlapMatrix out;
    out.entries = detail::overlap(states, states);
    out.condition_number = detail::condition_number(out.entries);
    return out;
}

inline std::vector<SpectrumPoint> transmission_spectrum(const System& system, std::span<const double> energies) {
    std::vector<SpectrumPoint> out;
    out.reserve(energies.size());
    for (double eps : energies) {
        const ScatteringEigenstate p = solve_eigenstate(system, eps, Branch::plus);
        const ScatteringEigenstate m = solve_eigenstate(system, eps, Branch::minus);
        SpectrumPoint pt;
        pt.energy = eps;
        pt.t_plus = p.c;
        pt.r_plus = p.d;
        pt.t_minus = m.d;
        pt.r_minus = m.c;
        pt.flux_deficit = 1.0 - std::norm(p.c) - std::norm(p.d);
        out.push_back(pt);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spectral propagation

struct QuadratureSpec {
    std::optional<double> half_window;     // W; default max(200 g_tot, 20 |delta| + 50 g_tot)
    std::optional<std::size_t> intervals;  // even; default >= 2^14, raised to resolve delays
    double tolerance = 1e-4;               // node/window doubling must move amplitudes less than this
    bool check_convergence = true;
    double completeness_tolerance = 1e-3;  // |(alpha1, alpha2)(0) - (1, 0)|
    double max_condition = 1e8;            // of the overlap matrix at any node
};

struct QuadratureGrid {
    double center = 0.0;       // mean qubit frequency
    double half_window = 0.0;  // energies span [center - W, center + W]
    std::size_t intervals = 0; // composite Simpson, even
};

struct AmplitudeTrace {
    std::vector<double> times;
    // Qubit amplitudes in the frame rotating at the mean qubit frequency.
    std::vector<cplx> alpha1, alpha2;
    std::vector<double> survival; // |alpha1|^2 + |alpha2|^2
    QuadratureGrid grid;
    double convergence_error = 0.0;  // max change under node/window doubling
    double completeness_error = 0.0; // |(alpha1, alpha2)(0) - (1, 0)|
};

inline double concurrence_from_amplitudes(cplx alpha1, cplx alpha2) {
    return std::clamp(2.0 * std::abs(alpha1) * std::abs(alpha2), 0.0, 1.0);
}

namespace detail {

inline double total_guided(const QubitParams& q) { return q.gamma_r + q.gamma_l; }

inline std::size_t next_pow2(double x) {
    std::size_t n = 1;
    while (static_cast<double>(n) < x)
        n <<= 1;
    return n;
}

// Refuses configurations whose scattering basis is (nearly) incomplete.
inline void require_propagatable(const System& s) {
    if (detail::total_guided(s.qubit(0)) == 0.0)
        throw PreconditionError("propagate: qubit 1 is not coupled to the waveguide");
    const bool non_chiral = relative_asymmetry(s.qubit(0)) < 1e-6 && relative_asymmetry(s.qubit(1)) < 1e-6 &&
                            detail::total_guided(s.qubit(1)) > 0.0;
    const double order = fabry_perot_order(s);
    if (non_chiral && std::abs(order - std::round(order)) < 1e-6)
        throw PreconditionError(
            "propagate: non-chiral emitters at (or within 1e-6 of) a Fabry-Perot separation support a "
            "localized photon; the scattering basis is incomplete here, use the markovian engine");
}

// Slowest amplitude decay rate of the two collective modes in the Markov
// approximation. Near Fabry-Perot separations one mode is much narrower than
// either emitter alone, and the energy grid has to resolve it.
inline double slowest_collective_decay(const System& s) {
    const QubitParams& a = s.qubit(0);
    const QubitParams& b = s.qubit(1);
    const cplx g1(0.5 * (total_guided(a) + a.gamma_loss), 0.5 * s.detuning());
    const cplx g2(0.5 * (total_guided(b) + b.gamma_loss), -0.5 * s.detuning());
    const double k = std::sqrt(a.gamma_r * b.gamma_r * a.gamma_l * b.gamma_l);
    const cplx coupling = k * std::polar(1.0, 2.0 * s.mean_frequency() * s.delay());
    const cplx root = std::sqrt(0.25 * (g1 - g2) * (g1 - g2) + coupling);
    const cplx mean = 0.5 * (g1 + g2);
    return std::min((mean - root).real(), (mean + root).real());
}

} // namespace detail

/// Window and node count used by propagate for times up to `t_max`.
inline QuadratureGrid default_quadrature(const System& system, double t_max, const QuadratureSpec& spec = {}) {
    const double g_tot = std::max(detail::total_guided(system.qubit(0)), detail::total_guided(system.qubit(1)));
    QuadratureGrid g;
    g.center = system.mean_frequency();
    g.half_window = spec.half_window.value_or(std::max(200.0 * g_tot, 20.0 * std::abs(system.detuning()) + 50.0 * g_tot));
    if (!(g.half_window > 0.0))
        throw PreconditionError("quadrature window must be positive");
    if (spec.intervals) {
        g.intervals = *spec.intervals + (*spec.intervals % 2);
        return g;
    }
    // Node spacing must resolve (i) the slowest single-emitter linewidth,
    // (ii) round-trip retardation phases e^{2 i eps d / v_g}, and (iii) keep
    // the aliasing period 2 pi / h well beyond every evaluated time.
    double kappa = system.slowest_decay();
    if (const double collective = detail::slowest_collective_decay(system); collective > 0.0)
        kappa = std::min(kappa, collective);
    const double delay = system.delay();
    double h = 2.0 * g.half_window / 16384.0;
    if (kappa > 0.0)
        h = std::min(h, kappa / 8.0);
    if (delay > 0.0)
        h = std::min(h, 2.0 * std::numbers::pi / (16.0 * 2.0 * delay));
    const double period = 2.0 * std::max(t_max, 0.0) + 4.0 * delay + (kappa > 0.0 ? 60.0 / kappa : 0.0);
    if (period > 0.0)
        h = std::min(h, 2.0 * std::numbers::pi / period);
    const std::size_t n = detail::next_pow2(2.0 * g.half_window / h);
    constexpr std::size_t max_intervals = std::size_t{1} << 22;
    if (n > max_intervals)
        throw NumericalError("propagate: required quadrature (" + std::to_string(n) +
                             " intervals) exceeds the supported maximum of 2^22");
    g.intervals = n;
    return g;
}

/// Precomputed spectral representation of U(t) acting on sigma_1^+|0>.
/// Evaluating the amplitudes at a time is a single weighted sum over nodes.
class SpectralPropagator {
public:
    SpectralPropagator(const System& system, QuadratureGrid grid, double max_condition = 1e8)
        : grid_(grid) {
        if (grid.intervals < 2 || grid.intervals % 2 != 0)
            throw PreconditionError("SpectralPropagator: interval count must be even and >= 2");
        const std::size_t nodes = grid.intervals + 1;
        h_ = 2.0 * grid.half_window / static_cast<double>(grid.intervals);
        weighted1_.resize(nodes);
        weighted2_.resize(nodes);

        const QubitParams& q1 = system.qubit(0);
        const QubitParams& q2 = system.qubit(1);
        const bool lossless = q1.gamma_loss == 0.0 && q2.gamma_loss == 0.0;
        const auto omega = detail::lossy_frequencies(system);
        const auto omega_dual = detail::dual_frequencies(system);
        const double norm = 1.0 / (2.0 * std::numbers::pi * system.v_g());

        // Lorentzian tail model with the exact large-|eps| behaviour of the
        // integrands; its Fourier transform is added back analytically.
        kappa_ = 0.5 * (detail::total_guided(q1) + q1.gamma_loss);
        if (!(kappa_ > 0.0))
            throw PreconditionError("SpectralPropagator: qubit 1 is not coupled to the waveguide");
        c1_ = detail::total_guided(q1) / (2.0 * std::numbers::pi);
        c_right_ = std::sqrt(q1.gamma_r * q2.gamma_r) / (2.0 * std::numbers::pi);
        c_left_ = std::sqrt(q1.gamma_l * q2.gamma_l) / (2.0 * std::numbers::pi);
        delay_ = system.delay();

        for (std::size_t n = 0; n < nodes; ++n) {
            const double u = -grid.half_window + h_ * static_cast<double>(n);
            const double eps = grid.center + u;
            const std::array<ScatteringEigenstate, 2> kets{
                detail::solve_with_frequencies(system, eps, Branch::plus, omega),
                detail::solve_with_frequencies(system, eps, Branch::minus, omega)};
            std::array<ScatteringEigenstate, 2> bras = kets;
            if (!lossless) {
                bras = {detail::solve_with_frequencies(system, eps, Branch::plus, omega_dual),
                        detail::solve_with_frequencies(system, eps, Branch::minus, omega_dual)};
            }
            const Eigen::Matrix2cd s = detail::overlap(bras, kets);
            const double cond = detail::condition_number(s);
            max_condition_ = std::max(max_condition_, cond);
            if (!(cond <= max_condition))
                throw NumericalError("propagate: overlap matrix condition number " + std::to_string(cond) +
                                     " exceeds " + std::to_string(max_condition) + " at energy " +
                                     std::to_string(eps));
            const Eigen::Matrix2cd s_inv = s.inverse();

            cplx f1 = 0.0, f2 = 0.0;
            for (int i = 0; i < 2; ++i) {
                for (int k = 0; k < 2; ++k) {
                    const cplx proj = s_inv(i, k) * std::conj(bras[k].alpha1);
                    f1 += kets[i].alpha1 * proj;
                    f2 += kets[i].alpha2 * proj;
                }
            }
            const double lorentz = 1.0 / (u * u + kappa_ * kappa_);
            f1 = f1 * norm - c1_ * lorentz;
            f2 = f2 * norm - (c_right_ * std::polar(1.0, eps * delay_) + c_left_ * std::polar(1.0, -eps * delay_)) * lorentz;

            const double w = (n == 0 || n + 1 == nodes) ? 1.0 : (n % 2 == 1 ? 4.0 : 2.0);
            weighted1_[n] = f1 * (w * h_ / 3.0);
            weighted2_[n] = f2 * (w * h_ / 3.0);
        }
    }

    /// (alpha1, alpha2) at time t, rotating frame at the grid center.
    std::array<cplx, 2> amplitudes(double t) const {
        cplx acc1 = 0.0, acc2 = 0.0;
        const std::size_t nodes = weighted1_.size();
        const cplx step = std::polar(1.0, -h_ * t);
        cplx z;
        for (std::size_t n = 0; n < nodes; ++n) {
            if (n % 256 == 0)
                z = std::polar(1.0, -(-grid_.half_window + h_ * static_cast<double>(n)) * t);
            acc1 += weighted1_[n] * z;
            acc2 += weighted2_[n] * z;
            z *= step;
        }
        const double pk = std::numbers::pi / kappa_;
        acc1 += c1_ * pk * std::exp(-kappa_ * std::abs(t));
        const double c = grid_.center;
        acc2 += c_right_ * pk * std::polar(std::exp(-kappa_ * std::abs(t - delay_)), c * delay_);
        acc2 += c_left_ * pk * std::polar(std::exp(-kappa_ * std::abs(t + delay_)), -c * delay_);
        return {acc1, acc2};
    }

    double concurrence(double t) const {
        const auto a = amplitudes(t);
        return concurrence_from_amplitudes(a[0], a[1]);
    }

    const QuadratureGrid& grid() const noexcept { return grid_; }
    double max_condition_number() const noexcept { return max_condition_; }

private:
    QuadratureGrid grid_;
    double h_ = 0.0;
    double kappa_ = 1.0;
    double c1_ = 0.0, c_right_ = 0.0, c_left_ = 0.0, delay_ = 0.0;
    double max_condition_ = 0.0;
    std::vector<cplx> weighted1_, weighted2_;
};

namespace detail {

inline double amplitude_distance(std::span<const std::array<cplx, 2>> a, std::span<const std::array<cplx, 2>> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max({d, std::abs(a[i][0] - b[i][0]), std::abs(a[i][1] - b[i][1])});
    return d;
}

inline std::vector<std::array<cplx, 2>> sample(const SpectralPropagator& p, std::span<const double> times) {
    std::vector<std::array<cplx, 2>> out(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        out[i] = p.amplitudes(times[i]);
    return out;
}

// Compares `base` on `times` against propagators with doubled nodes and
// window and with doubled nodes only; returns the largest deviation.
inline double convergence_error(const System& system, const QuadratureGrid& grid,
                                std::span<const std::array<cplx, 2>> base, std::span<const double> times,
                                const QuadratureSpec& spec) {
    QuadratureGrid wider{grid.center, 2.0 * grid.half_window, 2 * grid.intervals};
    QuadratureGrid finer{grid.center, grid.half_window, 2 * grid.intervals};
    double err = 0.0;
    for (const QuadratureGrid& g : {wider, finer}) {
        const SpectralPropagator p(system, g, spec.max_condition);
        err = std::max(err, amplitude_distance(base, sample(p, times)));
    }
    if (err > spec.tolerance)
        throw NumericalError("propagate: quadrature not converged: doubling nodes/window changed the amplitudes by " +
                             std::to_string(err) + " (> " + std::to_string(spec.tolerance) + ") with W = " +
                             std::to_string(grid.half_window) + ", N = " + std::to_string(grid.intervals));
    return err;
}

inline double completeness_error(const SpectralPropagator& p, const QuadratureSpec& spec) {
    const auto a0 = p.amplitudes(0.0);
    const double err = std::hypot(std::abs(a0[0] - 1.0), std::abs(a0[1]));
    if (err > spec.completeness_tolerance)
        throw NumericalError("propagate: U(0) deviates from identity by " + std::to_string(err) +
                             "; the spectral basis is incomplete for this configuration");
    return err;
}

} // namespace detail

/// Amplitudes of both qubits for the initial state sigma_1^+|0> on `t_grid`.
inline AmplitudeTrace propagate(const System& system, std::span<const double> t_grid, const QuadratureSpec& quad = {}) {
    detail::require_propagatable(system);
    const double t_max = t_grid.empty() ? 0.0 : *std::max_element(t_grid.begin(), t_grid.end());
    AmplitudeTrace tr;
    tr.grid = default_quadrature(system, t_max, quad);
    const SpectralPropagator prop(system, tr.grid, quad.max_condition);
    tr.completeness_error = detail::completeness_error(prop, quad);

    const auto amps = detail::sample(prop, t_grid);
    if (quad.check_convergence)
        tr.convergence_error = detail::convergence_error(system, tr.grid, amps, t_grid, quad);

    tr.times.assign(t_grid.begin(), t_grid.end());
    for (const auto& a : amps) {
        tr.alpha1.push_back(a[0]);
        tr.alpha2.push_back(a[1]);
        tr.survival.push_back(std::norm(a[0]) + std::norm(a[1]));
    }
    return tr;
}

/// Default horizon for maximum searches: arrival delay plus 20 / gamma_min.
inline double default_scattering_horizon(const System& system) {
    const DerivedRates& r = system.rates();
    double g_min = std::min(r.gamma[0], r.gamma[1]);
    if (g_min <= 0.0)
        g_min = std::max(r.gamma[0], r.gamma[1]);
    if (g_min <= 0.0)
        throw PreconditionError("no qubit is coupled to the waveguide");
    return system.delay() + 20.0 / g_min;
}

/// Maximum of 2 |alpha1| |alpha2| over [0, horizon] with the scattering engine.
inline PeakResult cmax_scattering(const System& system, std::optional<double> t_horizon = std::nullopt,
                                  const QuadratureSpec& quad = {}, std::size_t coarse_points = 2048) {
    detail::require_propagatable(system);
    const double horizon = t_horizon.value_or(default_scattering_horizon(system));
    const QuadratureGrid grid = default_quadrature(system, horizon, quad);
    const SpectralPropagator prop(system, grid, quad.max_condition);
    detail::completeness_error(prop, quad);

    const std::vector<double> times = log_dense_grid(horizon, coarse_points);
    const auto amps = detail::sample(prop, times);
    if (quad.check_convergence)
        detail::convergence_error(system, grid, amps, times, quad);
    std::vector<double> values(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        values[i] = concurrence_from_amplitudes(amps[i][0], amps[i][1]);
    return refine_peak([&](double t) { return prop.concurrence(t); }, times, values);
}

} // namespace chiralent
