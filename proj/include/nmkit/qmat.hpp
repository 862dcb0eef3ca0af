// qmat.hpp - Dense complex linear algebra for quantum states: Hermitian
// eigensolver, trace norm and trace distance, tensor products, partial traces,
// Helstrom discrimination.
//
// Vectorization is column-stacking throughout nmkit: vec(X)[i + N*j] = X(i, j),
// so that vec(A X B) = (B^T kron A) vec(X).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "nmkit/error.hpp"

namespace nmkit {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace qmat {

inline constexpr double kHermitianInputTol = 1e-8;
inline constexpr double kStateHermitianTol = 1e-10;
inline constexpr double kStateTraceTol = 1e-10;
inline constexpr double kStatePositivityTol = 1e-10;

struct EigenDecomposition {
    RealVector eigenvalues;      // ascending
    ComplexMatrix eigenvectors;  // columns, orthonormal
};

inline double max_abs(const ComplexMatrix& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const ComplexMatrix& a) {
    return max_abs(a - a.adjoint());
}

namespace detail {

// Cyclic complex Jacobi. `a` must already be exactly Hermitian.
inline EigenDecomposition jacobi_eig(ComplexMatrix a, bool want_vectors) {
    const Eigen::Index n = a.rows();
    ComplexMatrix v = want_vectors ? ComplexMatrix::Identity(n, n) : ComplexMatrix();
    for (Eigen::Index i = 0; i < n; ++i) a(i, i) = a(i, i).real();

    const double scale = std::max(1.0, a.norm());
    const double target = 1e-13 * scale;
    auto off_norm = [&] {
        double s = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) s += 2.0 * std::norm(a(p, q));
        return std::sqrt(s);
    };

    int sweep = 0;
    for (; sweep < 100 && off_norm() >= target; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const cplx apq = a(p, q);
                const double r = std::abs(apq);
                if (r <= 1e-300) continue;
                const cplx phase = apq / r;  // e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * r);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on (p, q); A <- J^H A J.
                const cplx jpp = c, jpq = s;
                const cplx jqp = -s * std::conj(phase), jqq = c * std::conj(phase);
                for (Eigen::Index k = 0; k < n; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * jpp + akq * jqp;
                    a(k, q) = akp * jpq + akq * jqq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
                    a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                if (want_vectors) {
                    for (Eigen::Index k = 0; k < n; ++k) {
                        const cplx vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = vkp * jpp + vkq * jqp;
                        v(k, q) = vkp * jpq + vkq * jqq;
                    }
                }
            }
        }
    }
    if (off_norm() >= target)
        throw Error(ErrorKind::ConvergenceFailure, "Jacobi did not converge in 100 sweeps");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        return a(x, x).real() < a(y, y).real();
    });
    EigenDecomposition out;
    out.eigenvalues.resize(n);
    if (want_vectors) out.eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.eigenvalues(k) = a(order[k], order[k]).real();
        if (want_vectors) out.eigenvectors.col(k) = v.col(order[k]);
    }
    return out;
}

inline ComplexMatrix checked_symmetrize(const ComplexMatrix& a) {
    if (a.rows() != a.cols())
        throw Error(ErrorKind::NonSquare, "matrix is " + std::to_string(a.rows()) + "x" +
                                              std::to_string(a.cols()));
    const double defect = hermiticity_defect(a);
    if (defect > kHermitianInputTol * std::max(1.0, max_abs(a)))
        throw Error(ErrorKind::NotHermitian,
                    "Hermiticity defect " + std::to_string(defect) + " exceeds 1e-8");
    return 0.5 * (a + a.adjoint());
}

} // namespace detail

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
/// The input is symmetrized as (A + A^H)/2; inputs further than 1e-8 from
/// Hermitian are rejected with NotHermitian.
inline EigenDecomposition herm_eig(const ComplexMatrix& a) {
    return detail::jacobi_eig(detail::checked_symmetrize(a), true);
}

inline RealVector herm_eigvals(const ComplexMatrix& a) {
    return detail::jacobi_eig(detail::checked_symmetrize(a), false).eigenvalues;
}

/// Sum of the moduli of the eigenvalues of a Hermitian matrix.
inline double trace_norm(const ComplexMatrix& a) {
    return herm_eigvals(a).cwiseAbs().sum();
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline ComplexVector vec(const ComplexMatrix& x) {
    return Eigen::Map<const ComplexVector>(x.data(), x.size());
}

inline ComplexMatrix unvec(const ComplexVector& v, Eigen::Index rows) {
    return Eigen::Map<const ComplexMatrix>(v.data(), rows, v.size() / rows);
}

} // namespace qmat

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
public:
    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) { validate(); }

    static DensityMatrix pure(const ComplexVector& psi) {
        const ComplexVector u = psi / psi.norm();
        return DensityMatrix(u * u.adjoint());
    }

    static DensityMatrix maximally_mixed(Eigen::Index dim) {
        return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
    }

    /// Hermitize, clip to unit trace and validate. For states produced by
    /// numerical propagation.
    static DensityMatrix renormalized(const ComplexMatrix& m) {
        ComplexMatrix h = 0.5 * (m + m.adjoint());
        return DensityMatrix(h / h.trace().real());
    }

    Eigen::Index dim() const { return m_.rows(); }
    const ComplexMatrix& matrix() const { return m_; }

private:
    void validate() const {
        if (m_.rows() != m_.cols() || m_.rows() == 0)
            throw Error(ErrorKind::NonSquare, "density matrix must be square and non-empty");
        if (qmat::hermiticity_defect(m_) > qmat::kStateHermitianTol)
            throw Error(ErrorKind::InvalidState, "density matrix not Hermitian");
        if (std::abs(m_.trace() - cplx(1.0)) > qmat::kStateTraceTol)
            throw Error(ErrorKind::InvalidState, "density matrix trace is not 1");
        const double lmin = qmat::herm_eigvals(m_)(0);
        if (lmin < -qmat::kStatePositivityTol)
            throw Error(ErrorKind::InvalidState,
                        "density matrix has negative eigenvalue " + std::to_string(lmin));
    }

    ComplexMatrix m_;
};

namespace qmat {

enum class Keep { System, Environment };

inline ComplexMatrix partial_trace(const ComplexMatrix& rho, Eigen::Index dim_s, Eigen::Index dim_e,
                                   Keep keep) {
    if (rho.rows() != dim_s * dim_e || rho.cols() != dim_s * dim_e)
        throw Error(ErrorKind::DimMismatch, "partial_trace: dimension is not dim_s*dim_e");
    if (keep == Keep::System) {
        ComplexMatrix out = ComplexMatrix::Zero(dim_s, dim_s);
        for (Eigen::Index i = 0; i < dim_s; ++i)
            for (Eigen::Index j = 0; j < dim_s; ++j)
                for (Eigen::Index e = 0; e < dim_e; ++e) out(i, j) += rho(i * dim_e + e, j * dim_e + e);
        return out;
    }
    ComplexMatrix out = ComplexMatrix::Zero(dim_e, dim_e);
    for (Eigen::Index a = 0; a < dim_e; ++a)
        for (Eigen::Index b = 0; b < dim_e; ++b)
            for (Eigen::Index s = 0; s < dim_s; ++s) out(a, b) += rho(s * dim_e + a, s * dim_e + b);
    return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, Eigen::Index dim_s, Eigen::Index dim_e,
                                   Keep keep) {
    return DensityMatrix(partial_trace(rho.matrix(), dim_s, dim_e, keep));
}

inline DensityMatrix kron(const DensityMatrix& a, const DensityMatrix& b) {
    return DensityMatrix(kron(a.matrix(), b.matrix()));
}

inline double trace_distance(const DensityMatrix& r1, const DensityMatrix& r2) {
    if (r1.dim() != r2.dim()) throw Error(ErrorKind::DimMismatch, "trace_distance: dims differ");
    return 0.5 * trace_norm(r1.matrix() - r2.matrix());
}

// Two-level closed form: a is the population difference, b the coherence difference.
inline double qubit_trace_distance(double a, cplx b) {
    return std::sqrt(a * a + std::norm(b));
}

struct HelstromResult {
    ComplexMatrix projector;
    double p_max;
};

/// Optimal two-state discrimination. The projector is onto the nonnegative
/// eigenspace of rho1 - rho2; it attains the maximum of tr{P(rho1 - rho2)},
/// which equals the trace distance.
inline HelstromResult helstrom(const DensityMatrix& r1, const DensityMatrix& r2) {
    if (r1.dim() != r2.dim()) throw Error(ErrorKind::DimMismatch, "helstrom: dims differ");
    const auto eig = herm_eig(r1.matrix() - r2.matrix());
    const Eigen::Index n = r1.dim();
    ComplexMatrix proj = ComplexMatrix::Zero(n, n);
    double d = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        d += 0.5 * std::abs(eig.eigenvalues(k));
        if (eig.eigenvalues(k) >= 0.0) proj += eig.eigenvectors.col(k) * eig.eigenvectors.col(k).adjoint();
    }
    return {proj, 0.5 * (1.0 + d)};
}

} // namespace qmat
} // namespace nmkit
