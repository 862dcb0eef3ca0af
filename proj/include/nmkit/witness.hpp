// witness.hpp - Exact total-system evolution at small dimension, the reduced
// map rho(0) -> tr_E{U rho(0) U^H}, and local detection of initial
// system-environment correlations through trace-distance increases.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nmkit/channel.hpp"
#include "nmkit/error.hpp"
#include "nmkit/qmat.hpp"

namespace nmkit {

/// Total Hamiltonian on H_S kron H_E, basis index s * dim_e + e.
struct TotalModel {
    Eigen::Index dim_s{0};
    Eigen::Index dim_e{0};
    ComplexMatrix hamiltonian;

    TotalModel(Eigen::Index ds, Eigen::Index de, ComplexMatrix h) : dim_s(ds), dim_e(de), hamiltonian(std::move(h)) {
        if (ds <= 0 || de <= 0) throw Error(ErrorKind::InvalidArgument, "dimensions must be positive");
        if (hamiltonian.rows() != ds * de || hamiltonian.cols() != ds * de)
            throw Error(ErrorKind::DimMismatch, "Hamiltonian must be (dim_s*dim_e) square");
        if (qmat::hermiticity_defect(hamiltonian) > 1e-10)
            throw Error(ErrorKind::NotHermitian, "total Hamiltonian is not Hermitian");
    }

    /// H = H_S kron I + I kron H_E + H_I
    static TotalModel from_parts(const ComplexMatrix& hs, const ComplexMatrix& he, const ComplexMatrix& hi) {
        const Eigen::Index ds = hs.rows(), de = he.rows();
        if (hi.rows() != ds * de || hi.cols() != ds * de)
            throw Error(ErrorKind::DimMismatch, "H_I must be (dim_s*dim_e) square");
        return {ds, de,
                qmat::kron(hs, ComplexMatrix::Identity(de, de)) + qmat::kron(ComplexMatrix::Identity(ds, ds), he) + hi};
    }

    Eigen::Index dim() const { return dim_s * dim_e; }
};

enum class WitnessVerdict { CorrelationsWitnessed, Inconclusive };

inline const char* to_string(WitnessVerdict v) {
    return v == WitnessVerdict::CorrelationsWitnessed ? "CorrelationsWitnessed" : "Inconclusive";
}

struct WitnessRecord {
    std::vector<double> times;
    std::vector<double> d_local;  // D(rho1_S(t), rho2_S(t))
    double d_local_0{0.0};
    double d_total{0.0};      // D(rho1(0), rho2(0))
    double bound_corr1{0.0};  // D(rho1, rho1_S kron rho1_E)
    double bound_corr2{0.0};
    double bound_env{0.0};    // D(rho1_E(0), rho2_E(0))
    double max_increase{0.0};
    WitnessVerdict verdict{WitnessVerdict::Inconclusive};
};

namespace witness {

inline constexpr double kDefaultTolerance = 1e-6;
inline constexpr double kInequalitySlack = 1e-9;

/// U(t) = exp(-iHt) from one eigendecomposition of H.
class Propagator {
public:
    explicit Propagator(const TotalModel& model) : eig_(qmat::herm_eig(model.hamiltonian)) {}

    ComplexMatrix unitary(double t) const {
        const Eigen::Index n = eig_.eigenvalues.size();
        ComplexVector phases(n);
        for (Eigen::Index k = 0; k < n; ++k) phases(k) = std::exp(cplx(0.0, -eig_.eigenvalues(k) * t));
        return eig_.eigenvectors * phases.asDiagonal() * eig_.eigenvectors.adjoint();
    }

private:
    qmat::EigenDecomposition eig_;
};

inline ComplexMatrix total_unitary(const TotalModel& model, double t) {
    return Propagator(model).unitary(t);
}

inline DensityMatrix reduced_dynamics(const TotalModel& model, const Propagator& prop, const DensityMatrix& rho,
                                      double t) {
    if (rho.dim() != model.dim()) throw Error(ErrorKind::DimMismatch, "total state dimension differs from model");
    const ComplexMatrix u = prop.unitary(t);
    return DensityMatrix::renormalized(
        qmat::partial_trace(u * rho.matrix() * u.adjoint(), model.dim_s, model.dim_e, qmat::Keep::System));
}

inline DensityMatrix reduced_dynamics(const TotalModel& model, const DensityMatrix& rho, double t) {
    return reduced_dynamics(model, Propagator(model), rho, t);
}

/// (E kron I) rho for a trace-preserving map E on the system factor.
inline DensityMatrix apply_local_operation(const Superoperator& op, const DensityMatrix& rho, Eigen::Index dim_s,
                                           Eigen::Index dim_e) {
    if (op.dim != dim_s || rho.dim() != dim_s * dim_e)
        throw Error(ErrorKind::DimMismatch, "local operation dimensions are inconsistent");
    if (channel::trace_preservation_defect(op) > 1e-9)
        throw Error(ErrorKind::NotTracePreserving, "local operation is not trace preserving");
    const ComplexMatrix& m = rho.matrix();
    ComplexMatrix out(m.rows(), m.cols());
    ComplexMatrix block(dim_s, dim_s);
    for (Eigen::Index e = 0; e < dim_e; ++e) {
        for (Eigen::Index f = 0; f < dim_e; ++f) {
            for (Eigen::Index s = 0; s < dim_s; ++s)
                for (Eigen::Index r = 0; r < dim_s; ++r) block(s, r) = m(s * dim_e + e, r * dim_e + f);
            const ComplexMatrix mapped = op.apply(block);
            for (Eigen::Index s = 0; s < dim_s; ++s)
                for (Eigen::Index r = 0; r < dim_s; ++r) out(s * dim_e + e, r * dim_e + f) = mapped(s, r);
        }
    }
    return DensityMatrix::renormalized(out);
}

/// D(rho, rho_S kron rho_E)
inline double correlation_distance(const DensityMatrix& rho, Eigen::Index dim_s, Eigen::Index dim_e) {
    const auto rs = qmat::partial_trace(rho, dim_s, dim_e, qmat::Keep::System);
    const auto re = qmat::partial_trace(rho, dim_s, dim_e, qmat::Keep::Environment);
    return qmat::trace_distance(rho, qmat::kron(rs, re));
}

/// Local distance series for an explicit pair of total initial states.
inline std::vector<double> local_distances(const TotalModel& model, const Propagator& prop, const DensityMatrix& rho1,
                                           const DensityMatrix& rho2, const std::vector<double>& times) {
    std::vector<double> d;
    d.reserve(times.size());
    for (double t : times)
        d.push_back(qmat::trace_distance(reduced_dynamics(model, prop, rho1, t), reduced_dynamics(model, prop, rho2, t)));
    return d;
}

inline std::vector<double> time_grid(double t_max, double dt) {
    if (!(dt > 0.0) || !(t_max >= 0.0)) throw Error(ErrorKind::InvalidArgument, "need dt > 0 and t_max >= 0");
    const auto steps = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
    std::vector<double> t(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) t[k] = static_cast<double>(k) * dt;
    return t;
}

/// Builds rho2 = (E kron I) rho1, evolves both, and reports whether the local
/// trace distance ever rises above its initial value by more than `tol`.
/// The bound D_S(t) - D_S(0) <= D(rho1, prod1) + D(rho2, prod2) + D(rho1_E, rho2_E)
/// and D_S(t) <= D(rho1, rho2) are checked at every grid point; a violation
/// throws InvariantViolation.
inline WitnessRecord run_witness(const TotalModel& model, const DensityMatrix& rho1, const Superoperator& local_op,
                                 double t_max, double dt, double tol = kDefaultTolerance) {
    if (rho1.dim() != model.dim()) throw Error(ErrorKind::DimMismatch, "total state dimension differs from model");
    const Eigen::Index ds = model.dim_s, de = model.dim_e;
    const DensityMatrix rho2 = apply_local_operation(local_op, rho1, ds, de);
    const Propagator prop(model);

    WitnessRecord rec;
    rec.times = time_grid(t_max, dt);
    rec.d_local = local_distances(model, prop, rho1, rho2, rec.times);
    rec.d_local_0 = qmat::trace_distance(qmat::partial_trace(rho1, ds, de, qmat::Keep::System),
                                         qmat::partial_trace(rho2, ds, de, qmat::Keep::System));
    rec.d_total = qmat::trace_distance(rho1, rho2);
    rec.bound_corr1 = correlation_distance(rho1, ds, de);
    rec.bound_corr2 = correlation_distance(rho2, ds, de);
    rec.bound_env = qmat::trace_distance(qmat::partial_trace(rho1, ds, de, qmat::Keep::Environment),
                                         qmat::partial_trace(rho2, ds, de, qmat::Keep::Environment));

    const double inaccessible = rec.d_total - rec.d_local_0;
    const double three_term = rec.bound_corr1 + rec.bound_corr2 + rec.bound_env;
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
        const double d = rec.d_local[k];
        const double increase = d - rec.d_local_0;
        rec.max_increase = std::max(rec.max_increase, increase);
        if (d > rec.d_total + kInequalitySlack || increase > inaccessible + kInequalitySlack ||
            increase > three_term + kInequalitySlack)
            throw Error(ErrorKind::InvariantViolation,
                        "trace-distance bound violated at t = " + std::to_string(rec.times[k]));
    }
    rec.verdict = rec.max_increase > tol ? WitnessVerdict::CorrelationsWitnessed : WitnessVerdict::Inconclusive;
    return rec;
}

} // namespace witness
} // namespace nmkit
