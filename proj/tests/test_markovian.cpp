#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "chiralent/markovian.hpp"

using namespace chiralent;
using cd = std::complex<double>;

namespace {

SystemConfig make(double d1, double d2, double gamma, double d_tilde, double beta = 1.0, double detuning = 0.0) {
    const auto k1 = couplings_from_targets(d1, beta, 2.0 * gamma);
    const auto k2 = couplings_from_targets(d2, beta, 2.0 * gamma);
    SystemConfig c;
    c.qubit1 = {1.0 + detuning / 2, k1.gamma_r, k1.gamma_l, k1.gamma_loss, 0.0};
    c.qubit2 = {1.0 - detuning / 2, k2.gamma_r, k2.gamma_l, k2.gamma_loss, 2.0 * std::numbers::pi * d_tilde};
    return c;
}

// Single-excitation amplitudes obey c' = M c; rho12 = c1 conj(c2).
struct AmplitudeOracle {
    Eigen::Matrix2cd m;
    explicit AmplitudeOracle(const System& s) {
        const auto& a = s.qubit(0);
        const auto& b = s.qubit(1);
        const cd ephi = std::polar(1.0, 2.0 * std::numbers::pi * s.d_tilde());
        const double delta = a.omega - b.omega;
        m(0, 0) = -cd(0.5 * (a.gamma_r + a.gamma_l + a.gamma_loss), 0.5 * delta);
        m(1, 1) = -cd(0.5 * (b.gamma_r + b.gamma_l + b.gamma_loss), -0.5 * delta);
        m(0, 1) = -std::sqrt(a.gamma_l * b.gamma_l) * ephi;
        m(1, 0) = -std::sqrt(a.gamma_r * b.gamma_r) * ephi;
    }
    Eigen::Vector2cd at(double t, Eigen::Vector2cd c0 = Eigen::Vector2cd(1.0, 0.0)) const {
        const Eigen::Matrix2cd e = (m * t).exp();
        return e * c0;
    }
};

std::vector<double> uniform(double t_max, int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i)
        t[i] = t_max * i / (n - 1);
    return t;
}

} // namespace

TEST(MasterRhs, HandExamples) {
    const System s = validate(make(0.0, 0.0, 0.3, 1.0));
    ReducedState st;
    st.rho11 = 1.0;
    const ReducedState d = master_rhs(st, s);
    EXPECT_NEAR(d.rho11, -0.6, 1e-14);
    EXPECT_NEAR(d.rho12.real(), -0.3, 1e-14);
    EXPECT_NEAR(d.rho12.imag(), 0.0, 1e-14);
    EXPECT_NEAR(d.rho00, 0.6, 1e-14);

    const ReducedState z = master_rhs(ReducedState{}, s);
    EXPECT_EQ(z.rho00, 0.0);
    EXPECT_EQ(z.rho11, 0.0);
    EXPECT_EQ(std::abs(z.rho12), 0.0);

    const System chiral = validate(make(1.0, 1.0, 0.3, 0.37));
    ReducedState mixed;
    mixed.rho11 = 0.5;
    mixed.rho22 = 0.3;
    mixed.rho12 = {0.2, -0.1};
    EXPECT_NEAR(master_rhs(mixed, chiral).rho11, -0.6 * 0.5, 1e-15);
}

TEST(Evolve, MatchesMatrixExponentialOracle) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ud(-1.0, 1.0), ug(0.01, 0.5), ux(0.0, 3.0), ub(0.5, 1.0),
        udet(-0.5, 0.5);
    for (int trial = 0; trial < 40; ++trial) {
        SystemConfig c = make(ud(rng), ud(rng), ug(rng), ux(rng), ub(rng), udet(rng));
        c.qubit2.gamma_r *= 1.3; // unequal couplings too
        const System s = validate(c);
        const AmplitudeOracle oracle(s);
        const auto grid = uniform(10.0 / s.rates().gamma[0], 41);
        const auto states = evolve(s, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto amp = oracle.at(grid[i]);
            const cd rho12 = amp(0) * std::conj(amp(1));
            EXPECT_NEAR(states[i].rho11, std::norm(amp(0)), 1e-8);
            EXPECT_NEAR(states[i].rho22, std::norm(amp(1)), 1e-8);
            EXPECT_NEAR(std::abs(states[i].rho12 - rho12), 0.0, 1e-8);
        }
    }
}

TEST(Evolve, NonChiralPlateau) {
    const System s = validate(make(0.0, 0.0, 1e-3, 1.0));
    const auto grid = uniform(20.0 / 1e-3, 201);
    const auto states = evolve(s, grid);
    EXPECT_NEAR(concurrence(states.back()), 0.5, 1e-4);
    EXPECT_NEAR(states.back().rho11, 0.25, 1e-4);
    EXPECT_NEAR(states.back().rho22, 0.25, 1e-4);
}

TEST(Evolve, LossyDecaysToZero) {
    const System s = validate(make(0.0, 0.0, 1e-3, 1.0, 0.98));
    const double c = concurrence(evolve(s, std::vector<double>{0.0, 1e6}).back());
    EXPECT_LT(c, 1e-3);
}

TEST(Evolve, RejectsBadGrid) {
    const System s = validate(make(0.5, 0.5, 0.1, 1.0));
    EXPECT_THROW(evolve(s, std::vector<double>{1.0, 2.0}), PreconditionError);
    EXPECT_THROW(evolve(s, std::vector<double>{0.0, 2.0, 1.0}), PreconditionError);
}

TEST(Concurrence, Examples) {
    ReducedState s;
    EXPECT_EQ(concurrence(s), 0.0);
    s.rho12 = 0.25;
    EXPECT_DOUBLE_EQ(concurrence(s), 0.5);
    s.rho12 = {0.3, 0.1};
    EXPECT_NEAR(concurrence(s), 2.0 * std::sqrt(0.1), 1e-15);
}

TEST(ConcurrenceAnalytic, Examples) {
    const System non_chiral = validate(make(0.0, 0.0, 1e-3, 1.0));
    EXPECT_EQ(concurrence_analytic(non_chiral, 0.0), 0.0);
    EXPECT_NEAR(concurrence_analytic(non_chiral, 1e5), 0.5, 1e-12);
    const System chiral = validate(make(1.0, 1.0, 0.2, 0.3));
    EXPECT_NEAR(concurrence_analytic(chiral, 1.0 / 0.4), 2.0 / std::numbers::e, 1e-14);
}

TEST(ConcurrenceAnalytic, MatchesOracle) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ud(-1.0, 1.0), ux(0.0, 2.0), ut(0.0, 15.0);
    for (int i = 0; i < 300; ++i) {
        const double g = 0.05;
        const System s = validate(make(ud(rng), ud(rng), g, ux(rng)));
        const double t = ut(rng) / g;
        const auto amp = AmplitudeOracle(s).at(t);
        EXPECT_NEAR(concurrence_analytic(s, t), 2.0 * std::abs(amp(0)) * std::abs(amp(1)), 1e-10);
    }
}

TEST(ConcurrenceAnalytic, SmoothThroughSeriesSwitch) {
    // q crosses q_switch as the directionality approaches 1.
    for (double t : {0.5, 3.0, 40.0}) {
        double prev = concurrence_analytic(validate(make(1.0, 1.0, 0.1, 0.9)), t);
        for (double eps : {1e-16, 1e-14, 1e-12, 1e-10, 1e-8}) {
            const double c = concurrence_analytic(validate(make(1.0 - eps, 1.0 - eps, 0.1, 0.9)), t);
            const auto amp = AmplitudeOracle(validate(make(1.0 - eps, 1.0 - eps, 0.1, 0.9))).at(t);
            EXPECT_NEAR(c, 2.0 * std::abs(amp(0)) * std::abs(amp(1)), 1e-9 + 1e-7 * c);
            EXPECT_NEAR(c, prev, 1e-3);
            prev = c;
        }
    }
}

TEST(ConcurrenceAnalytic, Preconditions) {
    SystemConfig c = make(0.3, 0.3, 0.1, 1.0);
    c.qubit2.gamma_r *= 2.0;
    EXPECT_THROW(concurrence_analytic(validate(c), 1.0), PreconditionError);
    EXPECT_THROW(concurrence_analytic(validate(make(0.3, 0.3, 0.1, 1.0, 0.9)), 1.0), PreconditionError);
    EXPECT_THROW(concurrence_analytic(validate(make(0.3, 0.3, 0.1, 1.0, 1.0, 0.01)), 1.0), PreconditionError);
    EXPECT_THROW(concurrence_analytic(validate(make(0.3, 0.3, 0.1, 1.0)), -1.0), PreconditionError);
}

TEST(CmaxAnalytic, Examples) {
    EXPECT_NEAR(cmax_analytic(1.0, 1.0), 2.0 / std::numbers::e, 1e-15);
    EXPECT_NEAR(cmax_analytic(0.0, 0.0), 0.5, 1e-15);
    for (double d2 : {-1.0, -0.3, 0.0, 0.7, 1.0})
        EXPECT_EQ(cmax_analytic(-1.0, d2), 0.0);
    EXPECT_THROW(cmax_analytic(1.1, 0.0), DomainError);
}

TEST(CmaxAnalytic, MatchesPeakOfClosedForm) {
    // Maximum of the closed form located by dense sampling around t*.
    for (double delta : {-0.8, -0.2, 0.3, 0.9, 0.999}) {
        const double g = 0.1;
        const System s = validate(make(delta, delta, g, 1.0));
        const double q = s.q();
        const double t_star = std::atanh(q) / (2.0 * q * g);
        double best = 0.0;
        for (int i = -200; i <= 200; ++i)
            best = std::max(best, concurrence_analytic(s, t_star * (1.0 + 1e-3 * i)));
        EXPECT_NEAR(cmax_analytic(delta, delta), best, 1e-9);
        EXPECT_NEAR(concurrence_analytic(s, t_star), cmax_analytic(delta, delta), 1e-12);
    }
}

TEST(CmaxAnalytic, IncreasingInDirectionality) {
    double prev = cmax_analytic(-1.0 + 1e-3, -1.0 + 1e-3);
    for (int i = 2; i <= 2000; ++i) {
        const double d = -1.0 + 1e-3 * i;
        const double c = cmax_analytic(d, d);
        EXPECT_GT(c, prev) << d;
        prev = c;
    }
}

TEST(CmaxNumeric, ChiralLimit) {
    const double g = 0.05;
    const PeakResult p = cmax_numeric(validate(make(1.0, 1.0, g, 1.0)));
    EXPECT_NEAR(p.c_max, 2.0 / std::numbers::e, 1e-9);
    EXPECT_NEAR(p.t_star, 1.0 / (2.0 * g), 1e-3 / g);
}

TEST(CmaxNumeric, PeakTime) {
    const double g = 0.02;
    for (double delta : {0.2, 0.6, 0.9}) {
        const System s = validate(make(delta, delta, g, 1.0));
        const PeakResult p = cmax_numeric(s);
        const double q = s.q();
        EXPECT_NEAR(p.c_max, cmax_analytic(delta, delta), 1e-6);
        EXPECT_NEAR(p.t_star * g, std::atanh(q) / (2.0 * q), 1e-3);
    }
}

TEST(CmaxNumeric, DeadChannel) {
    const PeakResult p = cmax_numeric(validate(make(-1.0, 0.4, 0.1, 0.37)));
    EXPECT_EQ(p.c_max, 0.0);
}

TEST(Evolve, ExchangeSymmetry) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ur(0.0, 0.3), ux(0.0, 10.0), ul(0.0, 0.05), udet(-0.1, 0.1);
    for (int trial = 0; trial < 20; ++trial) {
        SystemConfig a;
        const double det = udet(rng);
        a.qubit1 = {1.0 + det / 2, ur(rng) + 0.01, ur(rng), ul(rng), 0.0};
        a.qubit2 = {1.0 - det / 2, ur(rng) + 0.01, ur(rng), ul(rng), ux(rng)};
        SystemConfig b = a;
        b.qubit1 = {a.qubit2.omega, a.qubit2.gamma_l, a.qubit2.gamma_r, a.qubit2.gamma_loss, 0.0};
        b.qubit2 = {a.qubit1.omega, a.qubit1.gamma_l, a.qubit1.gamma_r, a.qubit1.gamma_loss, a.qubit2.position};
        const auto grid = uniform(60.0, 61);
        const auto sa = evolve(validate(a), grid);
        const auto sb = evolve(validate(b), grid, InitialExcitation::qubit2);
        for (std::size_t i = 0; i < grid.size(); ++i)
            EXPECT_NEAR(concurrence(sa[i]), concurrence(sb[i]), 1e-9);
    }
}

TEST(ConcurrenceTrace, MaxAndTime) {
    const System s = validate(make(0.9, 0.9, 0.1, 1.0));
    const auto grid = uniform(50.0, 501);
    const auto tr = concurrence_trace(evolve(s, grid));
    EXPECT_EQ(tr.values.front(), 0.0);
    EXPECT_GT(tr.c_max, 0.7);
    EXPECT_LE(tr.c_max, 1.0);
    EXPECT_GT(tr.t_star, 0.0);
}
