// tcl.hpp - Time-local master equations: Lindblad and time-dependent
// generators, canonical (diagonal) form, semigroup and time-ordered
// propagators, RK4 state evolution.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "nmkit/channel.hpp"
#include "nmkit/error.hpp"
#include "nmkit/qmat.hpp"

namespace nmkit {

struct DissipationChannel {
    double rate;
    ComplexMatrix op;
};

/// K rho = -i[H, rho] + sum_i rate_i (A_i rho A_i^H - 1/2 {A_i^H A_i, rho}).
/// Rates may be negative for time-local generators.
struct LindbladGenerator {
    ComplexMatrix hamiltonian;
    std::vector<DissipationChannel> channels;

    Eigen::Index dim() const { return hamiltonian.rows(); }
};

struct GeneratorTrajectory {
    double dt{0.0};
    std::vector<LindbladGenerator> generators;  // one per grid point t_k = k dt

    std::size_t size() const { return generators.size(); }
    double time(std::size_t k) const { return static_cast<double>(k) * dt; }
};

/// Generator written in a traceless orthonormal operator basis with a
/// Hermitian coefficient matrix.
struct KossakowskiForm {
    ComplexMatrix hamiltonian;
    std::vector<ComplexMatrix> basis;
    ComplexMatrix coefficients;
};

namespace tcl {

/// Orthonormal traceless basis of N x N operators (generalized Gell-Mann
/// matrices scaled to tr(F_i^H F_j) = delta_ij), N^2 - 1 elements.
inline std::vector<ComplexMatrix> traceless_basis(Eigen::Index n) {
    std::vector<ComplexMatrix> out;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = j + 1; k < n; ++k) {
            ComplexMatrix sx = ComplexMatrix::Zero(n, n), sy = ComplexMatrix::Zero(n, n);
            sx(j, k) = sx(k, j) = inv_sqrt2;
            sy(j, k) = cplx(0.0, -inv_sqrt2);
            sy(k, j) = cplx(0.0, inv_sqrt2);
            out.push_back(sx);
            out.push_back(sy);
        }
    }
    for (Eigen::Index l = 1; l < n; ++l) {
        ComplexMatrix d = ComplexMatrix::Zero(n, n);
        const double norm = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
        for (Eigen::Index m = 0; m < l; ++m) d(m, m) = norm;
        d(l, l) = -static_cast<double>(l) * norm;
        out.push_back(d);
    }
    return out;
}

inline ComplexMatrix hamiltonian_part(const ComplexMatrix& h) {
    const Eigen::Index n = h.rows();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    return cplx(0.0, -1.0) * (qmat::kron(id, h) - qmat::kron(h.transpose(), id));
}

// Superoperator of X -> A X B^H - 1/2 {B^H A, X}
inline ComplexMatrix dissipator_part(const ComplexMatrix& a, const ComplexMatrix& b) {
    const Eigen::Index n = a.rows();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    const ComplexMatrix bha = b.adjoint() * a;
    return qmat::kron(b.conjugate(), a) - 0.5 * qmat::kron(id, bha) - 0.5 * qmat::kron(bha.transpose(), id);
}

inline Superoperator generator_to_super(const LindbladGenerator& g) {
    const Eigen::Index n = g.dim();
    if (g.hamiltonian.cols() != n) throw Error(ErrorKind::NonSquare, "Hamiltonian must be square");
    if (qmat::hermiticity_defect(g.hamiltonian) > 1e-10)
        throw Error(ErrorKind::NotHermitian, "Hamiltonian is not Hermitian");
    ComplexMatrix s = hamiltonian_part(g.hamiltonian);
    for (const auto& ch : g.channels) {
        if (ch.op.rows() != n || ch.op.cols() != n)
            throw Error(ErrorKind::DimMismatch, "jump operator dimension differs from Hamiltonian");
        s += ch.rate * dissipator_part(ch.op, ch.op);
    }
    return {n, s};
}

inline void validate(const KossakowskiForm& k) {
    const Eigen::Index n = k.hamiltonian.rows();
    const std::size_t m = static_cast<std::size_t>(n * n - 1);
    if (k.basis.size() != m || k.coefficients.rows() != static_cast<Eigen::Index>(m) ||
        k.coefficients.cols() != static_cast<Eigen::Index>(m))
        throw Error(ErrorKind::DimMismatch, "Kossakowski form needs N^2-1 basis elements");
    for (std::size_t i = 0; i < m; ++i) {
        if (std::abs(k.basis[i].trace()) > 1e-10)
            throw Error(ErrorKind::InvalidArgument, "basis element is not traceless");
        for (std::size_t j = 0; j < m; ++j) {
            const cplx ip = (k.basis[i].adjoint() * k.basis[j]).trace();
            if (std::abs(ip - cplx(i == j ? 1.0 : 0.0)) > 1e-10)
                throw Error(ErrorKind::InvalidArgument, "basis is not orthonormal");
        }
    }
    if (qmat::hermiticity_defect(k.coefficients) > 1e-10)
        throw Error(ErrorKind::NotHermitian, "coefficient matrix is not Hermitian");
}

inline Superoperator kossakowski_to_super(const KossakowskiForm& k) {
    validate(k);
    const Eigen::Index n = k.hamiltonian.rows();
    ComplexMatrix s = hamiltonian_part(k.hamiltonian);
    for (std::size_t i = 0; i < k.basis.size(); ++i)
        for (std::size_t j = 0; j < k.basis.size(); ++j) {
            const cplx c = k.coefficients(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (c != cplx(0.0)) s += c * dissipator_part(k.basis[i], k.basis[j]);
        }
    return {n, s};
}

/// Diagonalizes the coefficient matrix: rates are its eigenvalues (possibly
/// negative), operators A_k = sum_i V_ik F_i with c = V diag(rates) V^H.
inline LindbladGenerator canonical_form(const KossakowskiForm& k) {
    validate(k);
    const auto eig = qmat::herm_eig(k.coefficients);
    LindbladGenerator g{k.hamiltonian, {}};
    for (Eigen::Index col = 0; col < eig.eigenvalues.size(); ++col) {
        ComplexMatrix a = ComplexMatrix::Zero(k.hamiltonian.rows(), k.hamiltonian.rows());
        for (std::size_t i = 0; i < k.basis.size(); ++i)
            a += eig.eigenvectors(static_cast<Eigen::Index>(i), col) * k.basis[i];
        g.channels.push_back({eig.eigenvalues(col), a});
    }
    return g;
}

/// Matrix exponential by scaling and squaring with a Taylor core. The scaled
/// matrix has 1-norm <= 1/2 and the series is cut once the next term drops
/// below 1e-17 relative, keeping the remainder under 1e-13.
inline ComplexMatrix expm(const ComplexMatrix& a) {
    const Eigen::Index n = a.rows();
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const ComplexMatrix x = a / std::ldexp(1.0, squarings);
    ComplexMatrix result = ComplexMatrix::Identity(n, n);
    ComplexMatrix term = ComplexMatrix::Identity(n, n);
    for (int k = 1; k < 40; ++k) {
        term = term * x / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().colwise().sum().maxCoeff() < 1e-17) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

inline Superoperator expm_propagator(const LindbladGenerator& g, double t) {
    if (t < 0.0) throw Error(ErrorKind::NegativeTime, "propagation time must be >= 0");
    const Superoperator l = generator_to_super(g);
    return {l.dim, expm(t * l.matrix)};
}

namespace detail {

inline std::vector<Superoperator> generator_supers(const GeneratorTrajectory& traj) {
    std::vector<Superoperator> out;
    out.reserve(traj.size());
    for (const auto& g : traj.generators) out.push_back(generator_to_super(g));
    return out;
}

inline Superoperator midpoint_step(const Superoperator& k0, const Superoperator& k1, double dt) {
    return {k0.dim, expm(0.5 * dt * (k0.matrix + k1.matrix))};
}

} // namespace detail

/// Time-ordered Phi(t_i2, t_i1): product of per-step exponentials of the
/// generator evaluated at interval midpoints (linear interpolation of K).
inline Superoperator ordered_propagator(const GeneratorTrajectory& traj, std::size_t i1, std::size_t i2) {
    if (i2 < i1 || i2 >= traj.size())
        throw Error(ErrorKind::InvalidArgument, "ordered_propagator: need i1 <= i2 < size");
    const Eigen::Index n = traj.generators.front().dim();
    Superoperator phi = Superoperator::identity(n);
    Superoperator prev = generator_to_super(traj.generators[i1]);
    for (std::size_t k = i1; k < i2; ++k) {
        Superoperator next = generator_to_super(traj.generators[k + 1]);
        phi = detail::midpoint_step(prev, next, traj.dt).compose(phi);
        prev = std::move(next);
    }
    return phi;
}

/// Phi(t_k, 0) for every grid point, accumulated in one pass.
inline MapFamily ordered_family(const GeneratorTrajectory& traj) {
    const auto ks = detail::generator_supers(traj);
    MapFamily fam;
    const Eigen::Index n = ks.front().dim;
    fam.times.push_back(0.0);
    fam.maps.push_back(Superoperator::identity(n));
    for (std::size_t k = 0; k + 1 < ks.size(); ++k) {
        fam.times.push_back(traj.time(k + 1));
        fam.maps.push_back(detail::midpoint_step(ks[k], ks[k + 1], traj.dt).compose(fam.maps.back()));
    }
    return fam;
}

struct EvolutionResult {
    std::vector<DensityMatrix> states;
    double max_trace_drift;  // largest |tr - 1| seen before renormalization
};

/// Classical RK4 on d rho/dt = K(t) rho. The half-step generator is the
/// average of the two grid generators. Every step is re-Hermitized and
/// renormalized to unit trace.
inline EvolutionResult evolve_state_detailed(const GeneratorTrajectory& traj, const DensityMatrix& rho0) {
    if (traj.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty generator trajectory");
    if (traj.generators.front().dim() != rho0.dim())
        throw Error(ErrorKind::DimMismatch, "initial state dimension differs from generator");
    const auto ks = detail::generator_supers(traj);
    const Eigen::Index n = rho0.dim();
    const double h = traj.dt;
    EvolutionResult out{{rho0}, 0.0};
    out.states.reserve(ks.size());
    ComplexVector y = qmat::vec(rho0.matrix());
    for (std::size_t k = 0; k + 1 < ks.size(); ++k) {
        const ComplexMatrix& k0 = ks[k].matrix;
        const ComplexMatrix& k2 = ks[k + 1].matrix;
        const ComplexMatrix k1 = 0.5 * (k0 + k2);
        const ComplexVector s1 = k0 * y;
        const ComplexVector s2 = k1 * (y + 0.5 * h * s1);
        const ComplexVector s3 = k1 * (y + 0.5 * h * s2);
        const ComplexVector s4 = k2 * (y + h * s3);
        y += (h / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
        ComplexMatrix rho = qmat::unvec(y, n);
        out.max_trace_drift = std::max(out.max_trace_drift, std::abs(rho.trace() - cplx(1.0)));
        out.states.push_back(DensityMatrix::renormalized(rho));
        y = qmat::vec(out.states.back().matrix());
    }
    return out;
}

inline std::vector<DensityMatrix> evolve_state(const GeneratorTrajectory& traj, const DensityMatrix& rho0) {
    return evolve_state_detailed(traj, rho0).states;
}

} // namespace tcl
} // namespace nmkit
