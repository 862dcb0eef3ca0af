// channel.hpp - Quantum channels as superoperators, Kraus sets and Choi
// matrices; complete-positivity test, inversion, intermediate maps and the
// divisibility audit of map families.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "nmkit/error.hpp"
#include "nmkit/qmat.hpp"

namespace nmkit {

/// Linear map on N x N operators, stored as an N^2 x N^2 matrix acting on
/// column-stacked vec(X).
struct Superoperator {
    Eigen::Index dim{0};
    ComplexMatrix matrix;

    Superoperator() = default;
    Superoperator(Eigen::Index n, ComplexMatrix m) : dim(n), matrix(std::move(m)) {
        if (matrix.rows() != n * n || matrix.cols() != n * n)
            throw Error(ErrorKind::DimMismatch, "superoperator must be N^2 x N^2");
    }

    static Superoperator identity(Eigen::Index n) {
        return {n, ComplexMatrix::Identity(n * n, n * n)};
    }

    ComplexMatrix apply(const ComplexMatrix& x) const {
        if (x.rows() != dim || x.cols() != dim)
            throw Error(ErrorKind::DimMismatch, "superoperator applied to wrong dimension");
        return qmat::unvec(matrix * qmat::vec(x), dim);
    }

    DensityMatrix apply(const DensityMatrix& rho) const {
        return DensityMatrix::renormalized(apply(rho.matrix()));
    }

    /// (this . rhs)[X] = this[rhs[X]]
    Superoperator compose(const Superoperator& rhs) const {
        if (dim != rhs.dim) throw Error(ErrorKind::DimMismatch, "compose: dims differ");
        return {dim, matrix * rhs.matrix};
    }
};

struct KrausSet {
    std::vector<ComplexMatrix> operators;
};

/// Choi matrix C = sum_ij Phi(|i><j|) kron |i><j|, output factor first. For a
/// TP map, tracing out the output factor gives I_N.
struct ChoiMatrix {
    Eigen::Index dim{0};
    ComplexMatrix matrix;
};

/// Uniform time grid of maps with maps[0] = identity.
struct MapFamily {
    std::vector<double> times;
    std::vector<Superoperator> maps;

    Eigen::Index dim() const { return maps.empty() ? 0 : maps.front().dim; }
    std::size_t size() const { return maps.size(); }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

namespace channel {

inline constexpr double kAuditCpTol = 1e-7;
inline constexpr double kSingularPivot = 1e-12;

inline Superoperator kraus_to_super(const KrausSet& k) {
    if (k.operators.empty()) throw Error(ErrorKind::InvalidArgument, "empty Kraus set");
    const Eigen::Index n = k.operators.front().rows();
    ComplexMatrix s = ComplexMatrix::Zero(n * n, n * n);
    for (const auto& op : k.operators) {
        if (op.rows() != n || op.cols() != n)
            throw Error(ErrorKind::DimMismatch, "Kraus operators must be square and equal-sized");
        s += qmat::kron(op.conjugate(), op);
    }
    return {n, s};
}

inline ChoiMatrix super_to_choi(const Superoperator& s) {
    const Eigen::Index n = s.dim;
    ComplexMatrix c(n * n, n * n);
    // C[(a,i),(b,j)] = Phi(|i><j|)[a,b] = S[a + n b, i + n j]
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index b = 0; b < n; ++b)
                for (Eigen::Index j = 0; j < n; ++j)
                    c(a * n + i, b * n + j) = s.matrix(a + n * b, i + n * j);
    return {n, c};
}

inline Superoperator choi_to_super(const ChoiMatrix& c) {
    const Eigen::Index n = c.dim;
    ComplexMatrix s(n * n, n * n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index b = 0; b < n; ++b)
                for (Eigen::Index j = 0; j < n; ++j)
                    s(a + n * b, i + n * j) = c.matrix(a * n + i, b * n + j);
    return {n, s};
}

/// Kraus operators from the spectral decomposition of the Choi matrix.
/// Eigenvalues below `tol` are dropped, so this is exact only for CP maps.
inline KrausSet choi_to_kraus(const ChoiMatrix& c, double tol = 1e-12) {
    const auto eig = qmat::herm_eig(c.matrix);
    const Eigen::Index n = c.dim;
    KrausSet out;
    for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
        const double lam = eig.eigenvalues(k);
        if (lam <= tol) continue;
        ComplexMatrix op(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index i = 0; i < n; ++i) op(a, i) = eig.eigenvectors(a * n + i, k);
        out.operators.push_back(std::sqrt(lam) * op);
    }
    return out;
}

struct CpVerdict {
    bool completely_positive;
    double min_choi_eigenvalue;
};

inline CpVerdict is_completely_positive(const Superoperator& s, double tol) {
    if (tol < 0.0) throw Error(ErrorKind::InvalidArgument, "CP tolerance must be >= 0");
    // Propagated maps carry rounding-level anti-Hermitian parts in the Choi
    // matrix; those are dropped, larger ones mean the map is not HP.
    const ComplexMatrix c = super_to_choi(s).matrix;
    const double defect = qmat::hermiticity_defect(c);
    const double lmin = qmat::herm_eigvals(0.5 * (c + c.adjoint()))(0);
    const bool hp = defect <= std::max(tol, 1e-12) * std::max(1.0, qmat::max_abs(c));
    return {hp && lmin >= -tol, lmin};
}

inline double trace_preservation_defect(const Superoperator& s) {
    const Eigen::Index n = s.dim;
    const ComplexVector vid = qmat::vec(ComplexMatrix::Identity(n, n));
    return (vid.adjoint() * s.matrix - vid.adjoint()).cwiseAbs().maxCoeff();
}

/// Gauss-Jordan inversion with partial pivoting. Throws Singular when a pivot
/// falls below 1e-12 in magnitude.
inline Superoperator invert(const Superoperator& s) {
    const Eigen::Index m = s.matrix.rows();
    ComplexMatrix a = s.matrix;
    ComplexMatrix inv = ComplexMatrix::Identity(m, m);
    for (Eigen::Index col = 0; col < m; ++col) {
        Eigen::Index piv = col;
        double best = std::abs(a(col, col));
        for (Eigen::Index r = col + 1; r < m; ++r) {
            if (std::abs(a(r, col)) > best) {
                best = std::abs(a(r, col));
                piv = r;
            }
        }
        if (best < kSingularPivot)
            throw Error(ErrorKind::Singular, "map is not invertible (pivot " + std::to_string(best) + ")");
        if (piv != col) {
            a.row(piv).swap(a.row(col));
            inv.row(piv).swap(inv.row(col));
        }
        const cplx p = a(col, col);
        a.row(col) /= p;
        inv.row(col) /= p;
        for (Eigen::Index r = 0; r < m; ++r) {
            if (r == col) continue;
            const cplx f = a(r, col);
            if (f == cplx(0.0)) continue;
            a.row(r) -= f * a.row(col);
            inv.row(r) -= f * inv.row(col);
        }
    }
    return {s.dim, inv};
}

/// Phi(t2, t1) = Phi(t2, 0) Phi(t1, 0)^{-1}
inline Superoperator intermediate_map(const MapFamily& family, std::size_t i1, std::size_t i2) {
    if (i2 < i1 || i2 >= family.size())
        throw Error(ErrorKind::InvalidArgument, "intermediate_map: need i1 <= i2 < size");
    if (i1 == i2) return Superoperator::identity(family.dim());
    return family.maps[i2].compose(invert(family.maps[i1]));
}

enum class AuditKind { NotCompletelyPositive, NotInvertible };

struct AuditInterval {
    double t_start;
    double t_end;
    AuditKind kind;
    // Minimum Choi eigenvalue over the merged steps; empty for NotInvertible.
    std::optional<double> min_choi_eigenvalue;
};

/// Tests CP of every adjacent-step intermediate map and merges failing steps
/// of the same kind into maximal intervals. Empty result means the family is
/// divisible at grid resolution.
inline std::vector<AuditInterval> audit_divisibility(const MapFamily& family, double tol = kAuditCpTol) {
    std::vector<AuditInterval> out;
    for (std::size_t k = 0; k + 1 < family.size(); ++k) {
        std::optional<AuditKind> kind;
        std::optional<double> lmin;
        try {
            const auto v = is_completely_positive(intermediate_map(family, k, k + 1), tol);
            if (!v.completely_positive) {
                kind = AuditKind::NotCompletelyPositive;
                lmin = v.min_choi_eigenvalue;
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Singular) throw;
            kind = AuditKind::NotInvertible;
        }
        if (!kind) continue;
        const double t0 = family.times[k], t1 = family.times[k + 1];
        if (!out.empty() && out.back().kind == *kind && out.back().t_end == t0) {
            out.back().t_end = t1;
            if (lmin) out.back().min_choi_eigenvalue = std::min(*out.back().min_choi_eigenvalue, *lmin);
        } else {
            out.push_back({t0, t1, *kind, lmin});
        }
    }
    return out;
}

} // namespace channel
} // namespace nmkit
