#pragma once

#include <squeezecool/hilbert.hpp>

#include <random>

namespace squeezecool::testutil {

inline CMatrix random_matrix(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = cplx(n(rng), n(rng));
    return m;
}

inline CMatrix random_density(std::mt19937_64& rng, int d) {
    const CMatrix g = random_matrix(rng, d);
    CMatrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

inline cplx random_rate(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> re(0.0, 2.0), im(-2.0, 2.0);
    return {re(rng), im(rng)};
}

/// Max-abs difference restricted to rows/cols below `keep`.
inline double max_diff_block(const CMatrix& a, const CMatrix& b, int keep) {
    return (a - b).topLeftCorner(keep, keep).cwiseAbs().maxCoeff();
}

}  // namespace squeezecool::testutil
