// core.hpp - parameter model, unit conventions and the directionality/beta algebra
//
// Units: everything is expressed in the natural convention omega0 = 1,
// v_g = 1 unless a config says otherwise. Rates are angular (1/time) and
// positions are lengths, so lambda0 = 2*pi*v_g/omega0.

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "chiralent/errors.hpp"

namespace chiralent {

struct QubitParams {
    double omega = 1.0;      // transition frequency
    double gamma_r = 0.0;    // decay rate into right-moving (toward +x) photons
    double gamma_l = 0.0;    // decay rate into left-moving photons
    double gamma_loss = 0.0; // decay into non-guided / lossy modes
    double position = 0.0;
};

// Qubit 1 is the left one and is the one carrying the initial excitation.
struct SystemConfig {
    QubitParams qubit1;
    QubitParams qubit2;
    double v_g = 1.0;
    double omega0 = 1.0;
};

/// (gamma_r - gamma_l) / (gamma_r + gamma_l), in [-1, 1].
inline double directionality(double gamma_r, double gamma_l) {
    if (!(gamma_r >= 0.0) || !(gamma_l >= 0.0))
        throw DomainError("directionality: rates must be non-negative");
    const double total = gamma_r + gamma_l;
    if (total == 0.0)
        throw DomainError("uncoupled qubit has no directionality");
    return (gamma_r - gamma_l) / total;
}

/// Fraction of the total decay that goes into guided modes.
inline double beta_factor(double gamma_r, double gamma_l, double gamma_loss) {
    if (!(gamma_r >= 0.0) || !(gamma_l >= 0.0) || !(gamma_loss >= 0.0))
        throw DomainError("beta_factor: rates must be non-negative");
    const double guided = gamma_r + gamma_l;
    const double total = guided + gamma_loss;
    if (total == 0.0)
        throw DomainError("beta_factor: all rates are zero");
    return guided / total;
}

struct Couplings {
    double gamma_r = 0.0;
    double gamma_l = 0.0;
    double gamma_loss = 0.0;
};

/// Inverse of (directionality, beta_factor, gamma_r + gamma_l).
inline Couplings couplings_from_targets(double delta, double beta, double gamma_total) {
    if (!(delta >= -1.0 && delta <= 1.0))
        throw DomainError("couplings_from_targets: delta must lie in [-1, 1]");
    if (beta == 0.0)
        throw DomainError("couplings_from_targets: beta = 0 implies infinite loss");
    if (!(beta > 0.0 && beta <= 1.0))
        throw DomainError("couplings_from_targets: beta must lie in (0, 1]");
    if (!(gamma_total > 0.0))
        throw DomainError("couplings_from_targets: gamma_total must be positive");
    return {gamma_total * (1.0 + delta) / 2.0,
            gamma_total * (1.0 - delta) / 2.0,
            gamma_total * (1.0 - beta) / beta};
}

// Per-qubit quantities derived from the couplings. Index 0 is qubit 1.
struct DerivedRates {
    std::array<double, 2> gamma{};  // (gamma_r + gamma_l) / 2
    std::array<double, 2> delta{};  // directionality
    std::array<double, 2> beta{};   // coupling fraction
    double q = 1.0;                 // (1 - delta1^2)^(1/4) (1 - delta2^2)^(1/4)
};

struct ValidationOptions {
    // Lets a qubit have zero coupling to everything. Only meant for
    // single-emitter scattering checks; its delta and beta are reported as 0.
    bool allow_uncoupled = false;
};

// A SystemConfig whose invariants have been checked, with derived quantities
// cached. Immutable once built.
class System {
public:
    const SystemConfig& config() const noexcept { return config_; }
    const QubitParams& qubit(int j) const noexcept { return j == 0 ? config_.qubit1 : config_.qubit2; }

    double v_g() const noexcept { return config_.v_g; }
    double omega0() const noexcept { return config_.omega0; }
    double lambda0() const noexcept { return lambda0_; }
    double separation() const noexcept { return config_.qubit2.position - config_.qubit1.position; }
    double d_tilde() const noexcept { return d_tilde_; }
    // omega1 - omega2
    double detuning() const noexcept { return config_.qubit1.omega - config_.qubit2.omega; }
    double mean_frequency() const noexcept { return 0.5 * (config_.qubit1.omega + config_.qubit2.omega); }
    // Retardation time d / v_g.
    double delay() const noexcept { return separation() / config_.v_g; }

    const DerivedRates& rates() const noexcept { return rates_; }
    double q() const noexcept { return rates_.q; }
    bool has_uncoupled_qubit() const noexcept { return uncoupled_; }

    // Smallest nonzero (gamma_j + gamma_loss_j / 2), i.e. the slowest
    // single-qubit amplitude decay rate.
    double slowest_decay() const noexcept;

    friend System validate(const SystemConfig& config, ValidationOptions options);

private:
    SystemConfig config_;
    double lambda0_ = 0.0;
    double d_tilde_ = 0.0;
    DerivedRates rates_;
    bool uncoupled_ = false;
};

namespace detail {

inline void require_finite(double value, const char* field) {
    if (!std::isfinite(value))
        throw ValidationError(field, "value is not finite");
}

inline void check_qubit(const QubitParams& q, const std::string& prefix, bool allow_uncoupled) {
    require_finite(q.omega, (prefix + ".omega").c_str());
    require_finite(q.gamma_r, (prefix + ".gamma_r").c_str());
    require_finite(q.gamma_l, (prefix + ".gamma_l").c_str());
    require_finite(q.gamma_loss, (prefix + ".gamma_loss").c_str());
    require_finite(q.position, (prefix + ".position").c_str());
    if (!(q.omega > 0.0))
        throw ValidationError(prefix + ".omega", "frequency must be positive");
    if (q.gamma_r < 0.0)
        throw ValidationError(prefix + ".gamma_r", "negative rate");
    if (q.gamma_l < 0.0)
        throw ValidationError(prefix + ".gamma_l", "negative rate");
    if (q.gamma_loss < 0.0)
        throw ValidationError(prefix + ".gamma_loss", "negative rate");
    if (!allow_uncoupled && q.gamma_r + q.gamma_l + q.gamma_loss == 0.0)
        throw ValidationError(prefix, "uncoupled qubit (all rates zero)");
}

// 1 - delta^2 evaluated from the rates, 4 gr gl / (gr + gl)^2, to avoid the
// cancellation in 1 - delta^2 near |delta| = 1.
inline double one_minus_delta_sq(double gr, double gl) {
    const double total = gr + gl;
    if (total == 0.0)
        return 1.0;
    return 4.0 * (gr / total) * (gl / total);
}

} // namespace detail

inline System validate(const SystemConfig& config, ValidationOptions options = {}) {
    detail::check_qubit(config.qubit1, "qubit1", options.allow_uncoupled);
    detail::check_qubit(config.qubit2, "qubit2", options.allow_uncoupled);
    detail::require_finite(config.v_g, "v_g");
    detail::require_finite(config.omega0, "omega0");
    if (!(config.v_g > 0.0))
        throw ValidationError("v_g", "group velocity must be positive");
    if (!(config.omega0 > 0.0))
        throw ValidationError("omega0", "reference frequency must be positive");
    if (config.qubit2.position < config.qubit1.position)
        throw ValidationError("qubit2.position",
                              "qubit ordering: qubit 1 must be the left qubit (x1 <= x2)");

    System s;
    s.config_ = config;
    s.lambda0_ = 2.0 * std::numbers::pi * config.v_g / config.omega0;
    s.d_tilde_ = (config.qubit2.position - config.qubit1.position) / s.lambda0_;

    const std::array<const QubitParams*, 2> qs{&config.qubit1, &config.qubit2};
    double prod = 1.0;
    for (int j = 0; j < 2; ++j) {
        const QubitParams& q = *qs[j];
        const double guided = q.gamma_r + q.gamma_l;
        s.rates_.gamma[j] = guided / 2.0;
        if (guided > 0.0) {
            s.rates_.delta[j] = directionality(q.gamma_r, q.gamma_l);
        } else {
            s.rates_.delta[j] = 0.0;
            s.uncoupled_ = true;
        }
        s.rates_.beta[j] = guided + q.gamma_loss > 0.0 ? beta_factor(q.gamma_r, q.gamma_l, q.gamma_loss) : 0.0;
        prod *= detail::one_minus_delta_sq(q.gamma_r, q.gamma_l);
    }
    s.rates_.q = std::sqrt(std::sqrt(prod));
    return s;
}

inline double System::slowest_decay() const noexcept {
    double slowest = 0.0;
    for (int j = 0; j < 2; ++j) {
        const double k = rates_.gamma[j] + qubit(j).gamma_loss / 2.0;
        if (k > 0.0 && (slowest == 0.0 || k < slowest))
            slowest = k;
    }
    return slowest;
}

} // namespace chiralent
