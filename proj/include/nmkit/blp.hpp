// blp.hpp - Information flow between open system and environment, measured by
// the trace distance of evolved state pairs: the rate sigma(t), backflow
// intervals, and the non-Markovianity measure maximized over initial pairs.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <tuple>
#include <vector>

#include "nmkit/channel.hpp"
#include "nmkit/error.hpp"
#include "nmkit/grid.hpp"
#include "nmkit/parallel.hpp"
#include "nmkit/qmat.hpp"

namespace nmkit {

struct BlochVector {
    double x{0.0}, y{0.0}, z{0.0};

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    auto tie() const { return std::tie(x, y, z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

struct DistanceTrajectory {
    std::vector<double> times;
    std::vector<double> d;
    std::vector<DensityMatrix> pair;  // the two initial states
};

struct GrowthInterval {
    double a;
    double b;
    double gain;
};

struct MeasureReport {
    double n_value{0.0};
    std::vector<DensityMatrix> optimal_pair;
    std::optional<std::array<BlochVector, 2>> optimal_bloch;  // qubit families only
    std::vector<GrowthInterval> intervals;
    long evaluations{0};
};

/// Pair search for the measure. Qubit families use a grid over the Bloch ball
/// followed by coordinate descent; other dimensions evaluate `candidates`.
struct PairSearchConfig {
    int radii{6};
    std::size_t seeds{5};
    double initial_step{0.25};
    double min_step{1e-3};
    int max_iterations{200};
    unsigned threads{1};
    std::vector<std::pair<DensityMatrix, DensityMatrix>> candidates;
};

namespace blp {

inline constexpr double kGrowthThreshold = 1e-12;
inline constexpr double kNonMarkovianThreshold = 1e-6;

inline ComplexMatrix pauli(int i) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    switch (i) {
        case 0: m(0, 1) = m(1, 0) = 1.0; break;
        case 1: m(0, 1) = cplx(0.0, -1.0); m(1, 0) = cplx(0.0, 1.0); break;
        default: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    }
    return m;
}

inline DensityMatrix from_bloch(const BlochVector& r) {
    ComplexMatrix m = 0.5 * ComplexMatrix::Identity(2, 2);
    for (int i = 0; i < 3; ++i) m += 0.5 * r[i] * pauli(i);
    return DensityMatrix(m);
}

inline BlochVector to_bloch(const DensityMatrix& rho) {
    if (rho.dim() != 2) throw Error(ErrorKind::DimMismatch, "Bloch vectors exist for qubits only");
    const ComplexMatrix& m = rho.matrix();
    return {2.0 * m(1, 0).real(), 2.0 * m(1, 0).imag(), (m(0, 0) - m(1, 1)).real()};
}

inline DistanceTrajectory distance_trajectory(const MapFamily& family, const DensityMatrix& r1,
                                              const DensityMatrix& r2) {
    if (r1.dim() != family.dim() || r2.dim() != family.dim())
        throw Error(ErrorKind::DimMismatch, "state dimension differs from map family");
    DistanceTrajectory out{family.times, {}, {r1, r2}};
    out.d.reserve(family.size());
    const ComplexMatrix diff = r1.matrix() - r2.matrix();
    // Phi(rho1) - Phi(rho2) = Phi(rho1 - rho2)
    for (const auto& phi : family.maps) out.d.push_back(0.5 * qmat::trace_norm(phi.apply(diff)));
    return out;
}

inline std::vector<double> sigma(const DistanceTrajectory& dt) {
    if (dt.d.size() < 3) throw Error(ErrorKind::InvalidArgument, "sigma needs at least 3 grid points");
    return grid::derivative(dt.d, dt.times[1] - dt.times[0]);
}

/// Maximal runs of grid steps with d[k+1] > d[k] + 1e-12. The gain of a run
/// telescopes to d(b) - d(a).
inline std::vector<GrowthInterval> growth_intervals(const std::vector<double>& times, const std::vector<double>& d) {
    std::vector<GrowthInterval> out;
    std::size_t k = 0;
    while (k + 1 < d.size()) {
        if (d[k + 1] > d[k] + kGrowthThreshold) {
            const std::size_t a = k;
            while (k + 1 < d.size() && d[k + 1] > d[k] + kGrowthThreshold) ++k;
            out.push_back({times[a], times[k], d[k] - d[a]});
        } else {
            ++k;
        }
    }
    return out;
}

inline std::vector<GrowthInterval> growth_intervals(const DistanceTrajectory& dt) {
    return growth_intervals(dt.times, dt.d);
}

struct PairMeasure {
    double value;
    std::vector<GrowthInterval> intervals;
};

inline PairMeasure measure_for_pair(const MapFamily& family, const DensityMatrix& r1, const DensityMatrix& r2) {
    auto intervals = growth_intervals(distance_trajectory(family, r1, r2));
    double total = 0.0;
    for (const auto& iv : intervals) total += iv.gain;
    return {total, std::move(intervals)};
}

namespace detail {

// Linear part of a qubit map on Bloch vectors: M_ij = 1/2 Re tr(s_i Phi(s_j)).
// For an HP trace-preserving map the trace distance of an evolved pair is
// 1/2 |M (r1 - r2)|.
struct BlochFamily {
    std::vector<double> times;
    std::vector<std::array<double, 9>> linear;

    explicit BlochFamily(const MapFamily& family) : times(family.times) {
        linear.reserve(family.size());
        std::array<ComplexMatrix, 3> s{pauli(0), pauli(1), pauli(2)};
        for (const auto& phi : family.maps) {
            std::array<double, 9> m{};
            for (int j = 0; j < 3; ++j) {
                const ComplexMatrix out = phi.apply(s[j]);
                for (int i = 0; i < 3; ++i) m[3 * i + j] = 0.5 * (s[i] * out).trace().real();
            }
            linear.push_back(m);
        }
    }

    double measure(const BlochVector& r1, const BlochVector& r2) const {
        const double dx = r1.x - r2.x, dy = r1.y - r2.y, dz = r1.z - r2.z;
        double total = 0.0, run_start = 0.0, prev = 0.0;
        bool in_run = false;
        for (std::size_t k = 0; k < linear.size(); ++k) {
            const auto& m = linear[k];
            const double ux = m[0] * dx + m[1] * dy + m[2] * dz;
            const double uy = m[3] * dx + m[4] * dy + m[5] * dz;
            const double uz = m[6] * dx + m[7] * dy + m[8] * dz;
            const double d = 0.5 * std::sqrt(ux * ux + uy * uy + uz * uz);
            if (k > 0) {
                const bool up = d > prev + kGrowthThreshold;
                if (up && !in_run) {
                    in_run = true;
                    run_start = prev;
                } else if (!up && in_run) {
                    in_run = false;
                    total += prev - run_start;
                }
            }
            prev = d;
        }
        if (in_run) total += prev - run_start;
        return total;
    }
};

struct Candidate {
    BlochVector r1, r2;
    double value;
};

inline bool lex_less(const Candidate& a, const Candidate& b) {
    return std::tuple_cat(a.r1.tie(), a.r2.tie()) < std::tuple_cat(b.r1.tie(), b.r2.tie());
}

// Larger value wins; values within 1e-12 tie and the lexicographically
// smaller Bloch pair wins.
inline bool better(const Candidate& a, const Candidate& b) {
    const double tol = 1e-12 * std::max(1.0, std::abs(b.value));
    if (a.value > b.value + tol) return true;
    if (b.value > a.value + tol) return false;
    return lex_less(a, b);
}

inline BlochVector clamp_to_ball(BlochVector r) {
    const double n = r.norm();
    if (n > 1.0) {
        r.x /= n;
        r.y /= n;
        r.z /= n;
    }
    return r;
}

inline std::vector<BlochVector> ball_grid(int radii) {
    std::vector<BlochVector> pts{{0.0, 0.0, 0.0}};
    for (int r = 1; r <= radii; ++r) {
        const double rad = static_cast<double>(r) / radii;
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j)
                for (int k = -1; k <= 1; ++k) {
                    if (i == 0 && j == 0 && k == 0) continue;
                    const double n = std::sqrt(static_cast<double>(i * i + j * j + k * k));
                    pts.push_back({rad * i / n, rad * j / n, rad * k / n});
                }
    }
    return pts;
}

inline Candidate refine(const BlochFamily& fam, Candidate c, const PairSearchConfig& cfg, long& evals) {
    double step = cfg.initial_step;
    for (int iter = 0; iter < cfg.max_iterations && step >= cfg.min_step; ++iter) {
        bool improved = false;
        for (int coord = 0; coord < 6; ++coord) {
            for (double sign : {1.0, -1.0}) {
                Candidate trial = c;
                BlochVector& r = coord < 3 ? trial.r1 : trial.r2;
                r[coord % 3] += sign * step;
                r = clamp_to_ball(r);
                trial.value = fam.measure(trial.r1, trial.r2);
                ++evals;
                if (trial.value > c.value + 1e-12 * std::max(1.0, c.value)) {
                    c = trial;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return c;
}

inline MeasureReport maximize_qubit(const MapFamily& family, const PairSearchConfig& cfg) {
    const BlochFamily fam(family);
    const auto pts = ball_grid(cfg.radii);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) pairs.emplace_back(i, j);
    // Antipodal surface pairs are part of the grid already (outermost shell).

    std::vector<Candidate> grid(pairs.size());
    parallel::for_each_index(pairs.size(), cfg.threads, [&](std::size_t p) {
        const auto& r1 = pts[pairs[p].first];
        const auto& r2 = pts[pairs[p].second];
        grid[p] = {r1, r2, fam.measure(r1, r2)};
    });
    long evals = static_cast<long>(grid.size());

    std::sort(grid.begin(), grid.end(), [](const Candidate& a, const Candidate& b) {
        if (a.value != b.value) return a.value > b.value;
        return lex_less(a, b);
    });
    const std::size_t nseeds = std::min(cfg.seeds, grid.size());
    std::vector<Candidate> refined(nseeds);
    std::vector<long> seed_evals(nseeds, 0);
    parallel::for_each_index(nseeds, cfg.threads,
                             [&](std::size_t s) { refined[s] = refine(fam, grid[s], cfg, seed_evals[s]); });
    Candidate best = grid.front();
    for (std::size_t s = 0; s < nseeds; ++s) {
        evals += seed_evals[s];
        if (better(refined[s], best)) best = refined[s];
    }

    MeasureReport rep;
    const DensityMatrix rho1 = from_bloch(best.r1), rho2 = from_bloch(best.r2);
    auto pm = measure_for_pair(family, rho1, rho2);
    rep.intervals = std::move(pm.intervals);
    for (const auto& iv : rep.intervals) rep.n_value += iv.gain;
    rep.optimal_pair = {rho1, rho2};
    rep.optimal_bloch = std::array<BlochVector, 2>{best.r1, best.r2};
    rep.evaluations = evals + 1;
    return rep;
}

} // namespace detail

/// Lower bound on the measure: the best pair found by the configured search.
inline MeasureReport maximize(const MapFamily& family, const PairSearchConfig& cfg = {}) {
    if (family.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty map family");
    if (family.dim() == 2 && cfg.candidates.empty()) return detail::maximize_qubit(family, cfg);
    if (cfg.candidates.empty())
        throw Error(ErrorKind::InvalidArgument, "dimension > 2 needs an explicit candidate pair list");

    std::vector<PairMeasure> results(cfg.candidates.size(), PairMeasure{0.0, {}});
    parallel::for_each_index(cfg.candidates.size(), cfg.threads, [&](std::size_t i) {
        results[i] = measure_for_pair(family, cfg.candidates[i].first, cfg.candidates[i].second);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i)
        if (results[i].value > results[best].value + 1e-12 * std::max(1.0, results[best].value)) best = i;
    MeasureReport rep;
    rep.intervals = results[best].intervals;
    for (const auto& iv : rep.intervals) rep.n_value += iv.gain;
    rep.optimal_pair = {cfg.candidates[best].first, cfg.candidates[best].second};
    if (family.dim() == 2)
        rep.optimal_bloch = std::array<BlochVector, 2>{to_bloch(rep.optimal_pair[0]), to_bloch(rep.optimal_pair[1])};
    rep.evaluations = static_cast<long>(results.size());
    return rep;
}

inline bool is_nonmarkovian(const MapFamily& family, const PairSearchConfig& cfg = {}) {
    return maximize(family, cfg).n_value > kNonMarkovianThreshold;
}

} // namespace blp
} // namespace nmkit
