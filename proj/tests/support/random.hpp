// random.hpp - Seeded generators for random states, unitaries and channels

#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>

#include <random>
#include <vector>

#include "nmkit/channel.hpp"
#include "nmkit/qmat.hpp"

namespace nmkit::testing {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double normal() { return normal_(gen_); }
    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }

    ComplexMatrix ginibre(Eigen::Index rows, Eigen::Index cols) {
        ComplexMatrix g(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = cplx(normal(), normal());
        return g;
    }

    ComplexMatrix hermitian(Eigen::Index n) {
        const ComplexMatrix g = ginibre(n, n);
        return 0.5 * (g + g.adjoint());
    }

    // Mixed state of full rank from the Ginibre ensemble.
    DensityMatrix state(Eigen::Index n) {
        const ComplexMatrix g = ginibre(n, n);
        ComplexMatrix r = g * g.adjoint();
        return DensityMatrix::renormalized(r / r.trace().real());
    }

    DensityMatrix pure_state(Eigen::Index n) {
        ComplexVector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(normal(), normal());
        return DensityMatrix::pure(v);
    }

    ComplexVector unit_vector(Eigen::Index n) {
        ComplexVector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(normal(), normal());
        return v / v.norm();
    }

    // Haar unitary: QR of a Ginibre matrix with the phases of R removed.
    ComplexMatrix unitary(Eigen::Index n) {
        Eigen::HouseholderQR<ComplexMatrix> qr(ginibre(n, n));
        ComplexMatrix q = qr.householderQ();
        const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Eigen::Index i = 0; i < n; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
        return q;
    }

    // CPTP channel from a Stinespring isometry with `rank` Kraus operators.
    KrausSet channel(Eigen::Index n, Eigen::Index rank) {
        const ComplexMatrix u = unitary(n * rank);
        KrausSet k;
        for (Eigen::Index a = 0; a < rank; ++a) k.operators.push_back(u.block(a * n, 0, n, n));
        return k;
    }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace nmkit::testing
