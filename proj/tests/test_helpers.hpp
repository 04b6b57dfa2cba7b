#pragma once

#include <vector>

#include "stratcov/linalg.hpp"
#include "stratcov/rng.hpp"

namespace testutil {

inline stratcov::SymMatrix random_symmetric(int n, stratcov::Rng& rng, double scale = 1.0) {
    std::vector<double> buf(static_cast<std::size_t>(n) * n);
    for (double& v : buf) v = scale * rng.normal();
    return stratcov::SymMatrix(n, buf);
}

/// M M^T + ridge * I, always SPD.
inline stratcov::SymMatrix random_spd(int n, stratcov::Rng& rng, double ridge = 1.0) {
    stratcov::Matrix M(n, n);
    for (double& v : M.a) v = rng.normal();
    std::vector<double> buf(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += M.at(i, k) * M.at(j, k);
            buf[static_cast<std::size_t>(i) * n + j] = s + (i == j ? ridge : 0.0);
        }
    return stratcov::SymMatrix(n, buf);
}

inline double max_abs_diff(const stratcov::SymMatrix& a, const stratcov::SymMatrix& b) {
    double m = 0.0;
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

}  // namespace testutil
