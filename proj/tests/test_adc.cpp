#include <gtest/gtest.h>

#include <cmath>

#include "nmkit/adc.hpp"
#include "nmkit/grid.hpp"
#include "support/oracles.hpp"
#include "support/random.hpp"

using namespace nmkit;
namespace nt = nmkit::testing;

namespace {

template <class F>
void expect_error(F&& f, ErrorKind kind) {
    try {
        f();
        ADD_FAILURE() << "no exception";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

double max_error_vs_analytic(const ExponentialKernel& k, double t_max, double dt) {
    const auto g = adc::g_numeric(k, t_max, dt);
    double err = 0.0;
    for (std::size_t i = 0; i < g.g.size(); ++i)
        err = std::max(err, std::abs(g.g[i] - adc::g_analytic(k, g.times[i])));
    return err;
}

} // namespace

TEST(Kernel, Validation) {
    EXPECT_THROW(ExponentialKernel(0.0, 1.0), Error);
    EXPECT_THROW(ExponentialKernel(1.0, -1.0), Error);
    const ExponentialKernel k(2.0, 4.0);
    EXPECT_DOUBLE_EQ(k.correlation_time(), 0.25);
    EXPECT_DOUBLE_EQ(k.relaxation_time(), 0.5);
    EXPECT_DOUBLE_EQ(k.alpha(), 0.5);
    EXPECT_DOUBLE_EQ(k(0.0).real(), 4.0);
    EXPECT_DOUBLE_EQ(k(-0.5).real(), k(0.5).real());
}

TEST(Kernel, TabulatedInterpolationAndRange) {
    const TabulatedKernel k(0.5, {cplx(1.0, 0.0), cplx(0.0, 2.0), cplx(-1.0, 0.0)});
    EXPECT_EQ(k(0.25), cplx(0.5, 1.0));
    EXPECT_EQ(k(1.0), cplx(-1.0, 0.0));
    EXPECT_THROW(k(1.2), Error);
    EXPECT_THROW(TabulatedKernel(0.0, {cplx(1.0)}), Error);
}

TEST(GAnalytic, InitialValueAndNegativeTime) {
    for (double g0 : {0.2, 0.5, 1.0, 5.0}) EXPECT_NEAR(adc::g_analytic(ExponentialKernel(g0, 1.0), 0.0).real(), 1.0, 1e-15);
    expect_error([] { adc::g_analytic(ExponentialKernel(1.0, 1.0), -0.1); }, ErrorKind::NegativeTime);
    expect_error([] { adc::markov_g(1.0, -0.1); }, ErrorKind::NegativeTime);
}

TEST(GAnalytic, CriticalCoupling) {
    const double lam = 2.0;
    const cplx g = adc::g_analytic(ExponentialKernel(lam / 2.0, lam), 2.0 / lam);
    EXPECT_NEAR(g.real(), 2.0 * std::exp(-1.0), 1e-12);
    EXPECT_NEAR(g.real(), 0.73576, 1e-5);
    // continuity across the branch switch
    for (double eps : {1e-6, -1e-6}) {
        const cplx gn = adc::g_analytic(ExponentialKernel(lam / 2.0 * (1.0 + eps), lam), 2.0 / lam);
        EXPECT_NEAR(gn.real(), g.real(), 1e-5);
    }
    const auto num = adc::g_numeric(ExponentialKernel(lam / 2.0, lam), 2.0 / lam, 1e-3);
    EXPECT_NEAR(num.g.back().real(), g.real(), 1e-6);
}

TEST(GAnalytic, MatchesIndependentOde) {
    for (double g0 : {0.2, 0.5, 1.0, 5.0})
        for (double t : {0.7, 3.0, 9.5})
            EXPECT_NEAR(adc::g_analytic(ExponentialKernel(g0, 1.0), t).real(), nt::g_from_ode(g0, 1.0, t), 1e-10)
                << g0 << " " << t;
}

TEST(GAnalytic, StrongCouplingHasFiniteZero) {
    const ExponentialKernel k(5.0, 1.0);
    const auto zeros = nt::bracket_roots([&](double t) { return adc::g_analytic(k, t).real(); }, 0.0, 10.0, 20000);
    ASSERT_FALSE(zeros.empty());
    const nt::OscillatingG osc{5.0, 1.0};
    EXPECT_NEAR(zeros.front(), (M_PI - std::atan(2.0 * osc.w())) / osc.w(), 1e-9);
}

TEST(GNumeric, ZeroKernelIsConstant) {
    const auto g = adc::g_numeric(TabulatedKernel(0.01, std::vector<cplx>(201, 0.0)), 2.0, 0.01);
    for (const auto& v : g.g) EXPECT_EQ(v, cplx(1.0));
    const auto r = adc::rates(g);
    for (std::size_t k = 0; k < r.gamma.size(); ++k) {
        EXPECT_EQ(*r.gamma[k], 0.0);
        EXPECT_EQ(*r.shift[k], 0.0);
    }
    const auto fam = adc::family_from(g);
    for (const auto& m : fam.maps) EXPECT_EQ(qmat::max_abs(m.matrix - ComplexMatrix::Identity(4, 4)), 0.0);
}

TEST(GNumeric, WeakCouplingAccuracy) {
    EXPECT_LT(max_error_vs_analytic(ExponentialKernel(0.2, 1.0), 10.0, 1e-3), 1e-5);
}

TEST(GNumeric, SecondOrderConvergence) {
    const ExponentialKernel k(1.0, 1.0);
    const double e1 = max_error_vs_analytic(k, 5.0, 4e-3);
    const double e2 = max_error_vs_analytic(k, 5.0, 2e-3);
    EXPECT_GE(e1 / e2, 3.0);
    EXPECT_LE(e1 / e2, 5.0);
}

TEST(GNumeric, TabulatedMatchesExponential) {
    const ExponentialKernel k(3.0, 2.0);
    const double dt = 2e-3, t_max = 4.0;
    std::vector<cplx> v;
    for (std::size_t i = 0; i <= adc::grid_steps(t_max, dt); ++i) v.push_back(k(static_cast<double>(i) * dt));
    const auto a = adc::g_numeric(k, t_max, dt);
    const auto b = adc::g_numeric(TabulatedKernel(dt, v), t_max, dt);
    ASSERT_EQ(a.g.size(), b.g.size());
    for (std::size_t i = 0; i < a.g.size(); ++i) EXPECT_NEAR(std::abs(a.g[i] - b.g[i]), 0.0, 1e-13);
}

TEST(GNumeric, ComplexKernelGivesFrequencyShift) {
    // detuned kernel f(t) = 1/2 g0 l e^{-l t} e^{i d t} rotates the phase of G
    const double dt = 1e-3, t_max = 3.0;
    std::vector<cplx> v;
    for (std::size_t i = 0; i <= adc::grid_steps(t_max, dt); ++i) {
        const double t = static_cast<double>(i) * dt;
        v.push_back(0.5 * 2.0 * 1.0 * std::exp(cplx(-1.0, 0.7) * t));
    }
    const auto g = adc::g_numeric(TabulatedKernel(dt, v), t_max, dt);
    const auto r = adc::rates(g);
    bool nonzero_shift = false;
    for (const auto& s : r.shift)
        if (s && std::abs(*s) > 1e-3) nonzero_shift = true;
    EXPECT_TRUE(nonzero_shift);
    for (const auto& x : g.g) EXPECT_LE(std::abs(x), 1.0 + 1e-8);
}

TEST(GNumeric, Errors) {
    const ExponentialKernel k(1.0, 1.0);
    expect_error([&] { adc::g_numeric(k, 1.0, 0.2); }, ErrorKind::GridTooCoarse);
    expect_error([&] { adc::g_numeric(k, 1.0, 0.0); }, ErrorKind::InvalidArgument);
    expect_error([&] { adc::g_numeric(k, 1e-3, 1e-2); }, ErrorKind::InvalidArgument);
    // tabulated kernel too short for the requested horizon
    expect_error([&] { adc::g_numeric(TabulatedKernel(0.01, {1.0, 1.0}), 1.0, 0.01); }, ErrorKind::InvalidArgument);
}

TEST(GNumeric, ThresholdBehaviour) {
    // analytic |G| on a fine grid out to where the first revival shows up for 0.51
    for (double a : {0.1, 0.3, 0.49, 0.51, 1.0, 5.0}) {
        const ExponentialKernel k(a, 1.0);
        bool increasing = false;
        double prev = 1.0;
        for (int i = 1; i <= 200000; ++i) {
            const double cur = std::abs(adc::g_analytic(k, i * 5e-4));
            if (cur > prev) increasing = true;
            prev = cur;
        }
        EXPECT_EQ(increasing, a > 0.5) << a;
    }
}

TEST(MarkovG, ValuesAndGapShrinks) {
    EXPECT_EQ(adc::markov_g(3.0, 0.0).real(), 1.0);
    EXPECT_NEAR(adc::markov_g(1.0, 2.0).real(), 0.36788, 1e-5);
    double last = 1.0;
    for (double alpha : {0.1, 0.01, 0.001}) {
        const ExponentialKernel k(alpha, 1.0);
        double gap = 0.0;
        for (int i = 0; i <= 5000; ++i) {
            const double t = 5.0 / alpha * i / 5000.0;
            gap = std::max(gap, std::abs(adc::g_analytic(k, t) - adc::markov_g(alpha, t)));
        }
        EXPECT_LT(gap, last);
        last = gap;
    }
    EXPECT_LT(last, 1e-3);
}

TEST(MapAt, Examples) {
    EXPECT_LE(qmat::max_abs(adc::map_at(1.0).matrix - ComplexMatrix::Identity(4, 4)), 0.0);
    nt::Rng rng(61);
    const auto ground = adc::map_at(0.0);
    for (int rep = 0; rep < 10; ++rep) {
        const auto out = ground.apply(rng.state(2));
        EXPECT_NEAR(out.matrix()(0, 0).real(), 1.0, 1e-12);
        EXPECT_LE(qmat::max_abs(out.matrix() - adc::map_at(0.0).apply(ComplexMatrix(out.matrix()))), 1e-12);
    }
    const auto v = channel::is_completely_positive(adc::map_at(0.5), 1e-7);
    EXPECT_TRUE(v.completely_positive);
    EXPECT_GE(v.min_choi_eigenvalue, -1e-12);
    expect_error([] { adc::map_at(1.0 + 1e-6); }, ErrorKind::UnphysicalG);
    EXPECT_NO_THROW(adc::map_at(1.0 + 1e-9));
}

TEST(MapAt, ActionOnMatrixElements) {
    const cplx g(0.3, -0.4);
    ComplexMatrix rho(2, 2);
    rho << 0.4, cplx(0.1, 0.2), cplx(0.1, -0.2), 0.6;
    const ComplexMatrix out = adc::map_at(g).apply(rho);
    EXPECT_NEAR(std::abs(out(1, 1) - 0.25 * 0.6), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out(0, 0) - (0.4 + 0.75 * 0.6)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out(1, 0) - g * rho(1, 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out(0, 1) - std::conj(g) * rho(0, 1)), 0.0, 1e-15);
}

TEST(MapAt, FamilyIsTpAndCp) {
    const auto fam = adc::family(ExponentialKernel(5.0, 1.0), 10.0, 1e-3);
    for (std::size_t k = 0; k < fam.size(); k += 97) {
        EXPECT_LE(channel::trace_preservation_defect(fam.maps[k]), 1e-10);
        EXPECT_GE(channel::is_completely_positive(fam.maps[k], 0.0).min_choi_eigenvalue, -1e-9);
    }
}

TEST(IntermediateClosedForm, Examples) {
    EXPECT_LE(qmat::max_abs(adc::intermediate_map_closed_form(0.4, 0.4).matrix - ComplexMatrix::Identity(4, 4)),
              1e-15);
    EXPECT_TRUE(channel::is_completely_positive(adc::intermediate_map_closed_form(0.6, cplx(0.1, 0.3)), 0.0)
                    .completely_positive);
    const auto v = channel::is_completely_positive(adc::intermediate_map_closed_form(0.5, 0.6), 0.0);
    EXPECT_NEAR(v.min_choi_eigenvalue, -0.44, 1e-12);
    expect_error([] { adc::intermediate_map_closed_form(0.0, 0.5); }, ErrorKind::Singular);
}

TEST(IntermediateClosedForm, CompositionConsistency) {
    nt::Rng rng(67);
    for (int rep = 0; rep < 100; ++rep) {
        const cplx g1 = std::polar(rng.uniform(0.05, 1.0), rng.uniform(0.0, 6.3));
        const cplx g2 = std::polar(rng.uniform(0.0, 1.0), rng.uniform(0.0, 6.3));
        const auto lhs = adc::intermediate_map_closed_form(g1, g2).compose(adc::map_at(g1));
        EXPECT_LE(qmat::max_abs(lhs.matrix - adc::map_at(g2).matrix), 1e-9);
        EXPECT_EQ(channel::is_completely_positive(adc::intermediate_map_closed_form(g1, g2), 1e-12).completely_positive,
                  std::abs(g2) <= std::abs(g1));
    }
}

TEST(Rates, MarkovLimit) {
    const double g0 = 0.7, dt = 1e-3;
    GTrajectory g;
    for (int i = 0; i <= 5000; ++i) {
        g.times.push_back(i * dt);
        g.g.push_back(adc::markov_g(g0, i * dt));
    }
    const auto r = adc::rates(g);
    for (std::size_t k = 0; k < r.gamma.size(); ++k) {
        EXPECT_NEAR(*r.gamma[k], g0, 1e-6);
        EXPECT_NEAR(*r.shift[k], 0.0, 1e-6);
    }
}

TEST(Rates, StrongCouplingGoesNegative) {
    // positive up to the first zero of G, negative on the revival after it
    const auto g = adc::g_numeric(ExponentialKernel(5.0, 1.0), 10.0, 1e-3);
    const auto r = adc::rates(g);
    const nt::OscillatingG osc{5.0, 1.0};
    const double z = (M_PI - std::atan(2.0 * osc.w())) / osc.w();
    bool negative_after = false;
    for (std::size_t k = 0; k < r.gamma.size(); ++k) {
        if (!r.gamma[k]) continue;
        if (g.times[k] < z - 0.01) EXPECT_GT(*r.gamma[k], 0.0) << g.times[k];
        if (g.times[k] > z + 0.01 && g.times[k] < z + 0.3 && *r.gamma[k] < 0.0) negative_after = true;
    }
    EXPECT_TRUE(negative_after);
}

TEST(Rates, GapMarkersAtZeros) {
    GTrajectory g;
    for (int i = 0; i <= 10; ++i) {
        g.times.push_back(0.1 * i);
        g.g.push_back(0.5 - 0.1 * i);  // exact zero at i = 5
    }
    const auto r = adc::rates(g);
    EXPECT_FALSE(r.gamma[5].has_value());
    EXPECT_FALSE(r.shift[5].has_value());
    EXPECT_TRUE(r.gamma[4].has_value());
    expect_error([&] { adc::generator_trajectory(r); }, ErrorKind::NearZeroG);
}

TEST(Rates, AbsoluteValueIdentity) {
    const double dt = 1e-3;
    const auto g = adc::g_numeric(ExponentialKernel(1.0, 1.0), 10.0, dt);
    const auto r = adc::rates(g);
    std::vector<double> absg;
    for (const auto& v : g.g) absg.push_back(std::abs(v));
    const auto dabs = grid::derivative(absg, dt);
    for (std::size_t k = 0; k < absg.size(); ++k) {
        if (absg[k] < 1e-3) continue;
        const double alt = -2.0 / absg[k] * dabs[k];
        EXPECT_LE(std::abs(*r.gamma[k] - alt), 10.0 * dt * dt * std::max(std::abs(alt), 1.0)) << g.times[k];
    }
}

TEST(Generator, Structure) {
    const auto g = adc::generator(0.8, 0.4);
    ASSERT_EQ(g.channels.size(), 1u);
    EXPECT_EQ(g.channels[0].rate, 0.8);
    EXPECT_EQ(g.channels[0].op(0, 1), cplx(1.0));
    EXPECT_EQ(g.hamiltonian(1, 1), cplx(0.2));
    EXPECT_EQ(g.hamiltonian(0, 0), cplx(0.0));
}
