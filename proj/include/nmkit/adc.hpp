// adc.hpp - Two-level system decaying into a zero-temperature bosonic
// reservoir. The reservoir enters only through the two-point correlation
// function f(tau); the amplitude G(t) solves
//
//     dG/dt = -int_0^t f(t - s) G(s) ds,   G(0) = 1,
//
// and fixes the exact dynamical map, the time-local rates and the
// intermediate maps of the model.

#pragma once

#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "nmkit/channel.hpp"
#include "nmkit/error.hpp"
#include "nmkit/grid.hpp"
#include "nmkit/qmat.hpp"
#include "nmkit/tcl.hpp"

namespace nmkit {

/// f(tau) = 1/2 gamma0 lambda exp(-lambda |tau|): resonant Lorentzian
/// spectral density with coupling gamma0 and width lambda (both 1/time).
struct ExponentialKernel {
    double gamma0;
    double lambda;

    ExponentialKernel(double g0, double lam) : gamma0(g0), lambda(lam) {
        if (!(g0 > 0.0) || !(lam > 0.0))
            throw Error(ErrorKind::InvalidArgument, "gamma0 and lambda must be > 0");
    }

    cplx operator()(double tau) const { return 0.5 * gamma0 * lambda * std::exp(-lambda * std::abs(tau)); }
    double correlation_time() const { return 1.0 / lambda; }
    double relaxation_time() const { return 1.0 / gamma0; }
    double alpha() const { return gamma0 / lambda; }
};

/// Samples of f on a uniform grid starting at tau = 0; linear interpolation
/// in between.
struct TabulatedKernel {
    double dt;
    std::vector<cplx> values;

    TabulatedKernel(double step, std::vector<cplx> v) : dt(step), values(std::move(v)) {
        if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "tabulated kernel dt must be > 0");
        if (values.empty()) throw Error(ErrorKind::InvalidArgument, "tabulated kernel has no samples");
    }

    double t_end() const { return dt * static_cast<double>(values.size() - 1); }

    cplx operator()(double tau) const {
        tau = std::abs(tau);
        const double x = tau / dt;
        const auto i = static_cast<std::size_t>(std::floor(x));
        if (i + 1 >= values.size()) {
            if (x <= static_cast<double>(values.size() - 1) + 1e-9) return values.back();
            throw Error(ErrorKind::InvalidArgument, "tabulated kernel does not cover requested time");
        }
        const double w = x - static_cast<double>(i);
        return (1.0 - w) * values[i] + w * values[i + 1];
    }
};

using Kernel = std::variant<ExponentialKernel, TabulatedKernel>;

struct GTrajectory {
    std::vector<double> times;
    std::vector<cplx> g;

    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

struct RateSeries {
    std::vector<double> times;
    // Empty entries are gap markers at points where |G| <= 1e-10; the rates
    // diverge there.
    std::vector<std::optional<double>> gamma;
    std::vector<std::optional<double>> shift;
};

namespace adc {

inline constexpr double kGTolerance = 1e-8;
inline constexpr double kRateGapThreshold = 1e-10;

inline ComplexMatrix sigma_minus() {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 1) = 1.0;  // |0><1|
    return m;
}

inline ComplexMatrix excited_projector() {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(1, 1) = 1.0;  // sigma_+ sigma_-
    return m;
}

inline cplx g_analytic(const ExponentialKernel& k, double t) {
    if (t < 0.0) throw Error(ErrorKind::NegativeTime, "G(t) needs t >= 0");
    const double lam = k.lambda;
    const double disc = lam * lam - 2.0 * k.gamma0 * lam;
    const double decay = std::exp(-0.5 * lam * t);
    const double dabs = std::sqrt(std::abs(disc));
    if (dabs < 1e-9 * lam) return decay * (1.0 + 0.5 * lam * t);
    if (disc > 0.0) {
        // cosh/sinh written as two decaying exponentials
        const double plus = std::exp(-0.5 * (lam - dabs) * t);
        const double minus = std::exp(-0.5 * (lam + dabs) * t);
        return 0.5 * (1.0 + lam / dabs) * plus + 0.5 * (1.0 - lam / dabs) * minus;
    }
    const double half = 0.5 * dabs * t;
    return decay * (std::cos(half) + (lam / dabs) * std::sin(half));
}

inline cplx markov_g(double gamma0, double t) {
    if (t < 0.0) throw Error(ErrorKind::NegativeTime, "G(t) needs t >= 0");
    return std::exp(-0.5 * gamma0 * t);
}

inline std::size_t grid_steps(double t_max, double dt) {
    return static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
}

/// Second-order solution of the memory equation on a uniform grid. The memory
/// integral uses trapezoid weights (1/2, 1, ..., 1, 1/2); each step is one
/// Heun predictor-corrector pass on dG/dt = -I(t).
inline GTrajectory g_numeric(const Kernel& kernel, double t_max, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be > 0");
    if (!(t_max >= dt)) throw Error(ErrorKind::InvalidArgument, "t_max must be >= dt");
    if (const auto* ek = std::get_if<ExponentialKernel>(&kernel)) {
        if (dt > ek->correlation_time() / 10.0)
            throw Error(ErrorKind::GridTooCoarse, "dt exceeds a tenth of the correlation time 1/lambda");
    }
    const std::size_t steps = grid_steps(t_max, dt);
    std::vector<cplx> f(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double tau = static_cast<double>(k) * dt;
        f[k] = std::visit([tau](const auto& kern) { return kern(tau); }, kernel);
    }

    GTrajectory out;
    out.times.resize(steps + 1);
    out.g.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) out.times[k] = static_cast<double>(k) * dt;
    auto& g = out.g;
    g[0] = 1.0;
    cplx memory = 0.0;  // I(t_n)
    for (std::size_t n = 0; n < steps; ++n) {
        // all terms of I(t_{n+1}) except the newest point
        cplx partial = 0.5 * f[n + 1] * g[0];
        for (std::size_t j = 1; j <= n; ++j) partial += f[n + 1 - j] * g[j];
        partial *= dt;
        const cplx predicted = g[n] - dt * memory;
        const cplx memory_pred = partial + 0.5 * dt * f[0] * predicted;
        g[n + 1] = g[n] - 0.5 * dt * (memory + memory_pred);
        memory = partial + 0.5 * dt * f[0] * g[n + 1];
    }
    return out;
}

/// Qubit damping map with amplitude r: rho11 -> |r|^2 rho11,
/// rho00 -> rho00 + (1 - |r|^2) rho11, rho10 -> r rho10, rho01 -> r* rho01.
inline Superoperator damping_map(cplx r) {
    // vec index i + 2 j: 0 -> rho00, 1 -> rho10, 2 -> rho01, 3 -> rho11
    ComplexMatrix s = ComplexMatrix::Zero(4, 4);
    const double p = std::norm(r);
    s(0, 0) = 1.0;
    s(0, 3) = 1.0 - p;
    s(1, 1) = r;
    s(2, 2) = std::conj(r);
    s(3, 3) = p;
    return {2, s};
}

inline Superoperator map_at(cplx g) {
    if (std::abs(g) > 1.0 + kGTolerance)
        throw Error(ErrorKind::UnphysicalG, "|G| = " + std::to_string(std::abs(g)) + " exceeds 1");
    return damping_map(g);
}

/// Phi(t2, t1) of the model, the damping map with ratio G(t2)/G(t1). It is
/// completely positive iff |G(t2)| <= |G(t1)|.
inline Superoperator intermediate_map_closed_form(cplx g1, cplx g2) {
    if (std::abs(g1) <= 1e-12) throw Error(ErrorKind::Singular, "G(t1) vanishes; no intermediate map");
    return damping_map(g2 / g1);
}

inline MapFamily family_from(const GTrajectory& g) {
    MapFamily fam;
    fam.times = g.times;
    fam.maps.reserve(g.g.size());
    for (const auto& v : g.g) fam.maps.push_back(map_at(v));
    return fam;
}

inline MapFamily family(const Kernel& kernel, double t_max, double dt) {
    return family_from(g_numeric(kernel, t_max, dt));
}

/// gamma(t) = -2 Re(G'/G), S(t) = -2 Im(G'/G).
inline RateSeries rates(const GTrajectory& g) {
    const auto dg = grid::derivative(g.g, g.dt());
    RateSeries out;
    out.times = g.times;
    out.gamma.resize(g.g.size());
    out.shift.resize(g.g.size());
    for (std::size_t k = 0; k < g.g.size(); ++k) {
        if (std::abs(g.g[k]) <= kRateGapThreshold) continue;
        const cplx q = dg[k] / g.g[k];
        out.gamma[k] = -2.0 * q.real();
        out.shift[k] = -2.0 * q.imag();
    }
    return out;
}

/// K(t) rho = -i/2 S(t) [sigma+ sigma-, rho]
///            + gamma(t) (sigma- rho sigma+ - 1/2 {sigma+ sigma-, rho})
inline LindbladGenerator generator(double gamma, double shift) {
    return {0.5 * shift * excited_projector(), {{gamma, sigma_minus()}}};
}

inline GeneratorTrajectory generator_trajectory(const RateSeries& r) {
    GeneratorTrajectory traj;
    traj.dt = r.times.size() > 1 ? r.times[1] - r.times[0] : 0.0;
    traj.generators.reserve(r.times.size());
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        if (!r.gamma[k] || !r.shift[k])
            throw Error(ErrorKind::NearZeroG, "rate series has a gap at t = " + std::to_string(r.times[k]));
        traj.generators.push_back(generator(*r.gamma[k], *r.shift[k]));
    }
    return traj;
}

} // namespace adc
} // namespace nmkit
