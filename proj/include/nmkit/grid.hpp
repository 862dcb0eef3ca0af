// grid.hpp - Finite differences on uniform grids

#pragma once

#include <vector>

#include "nmkit/error.hpp"

namespace nmkit::grid {

/// dy/dt: central differences inside, second-order one-sided stencils at the
/// two ends.
template <class T>
std::vector<T> derivative(const std::vector<T>& y, double dt) {
    const std::size_t n = y.size();
    if (n < 3) throw Error(ErrorKind::InvalidArgument, "need at least 3 grid points to differentiate");
    std::vector<T> d(n);
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dt);
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k - 1]) / (2.0 * dt);
    d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * dt);
    return d;
}

} // namespace nmkit::grid
