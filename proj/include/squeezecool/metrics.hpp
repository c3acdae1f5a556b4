#pragma once

// Squeezing figures of merit evaluated from Gaussian moments.

#include <squeezecool/error.hpp>
#include <squeezecool/gaussian.hpp>
#include <squeezecool/validity.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace squeezecool {

/// dB below the vacuum value: -10 log10(variance / vacuum_variance).
inline double squeezing_db(double variance, double vacuum_variance = 1.0) {
    require(variance > 0.0 && vacuum_variance > 0.0, "variance",
            "variance must be positive, got " + std::to_string(variance));
    return -10.0 * std::log10(variance / vacuum_variance);
}

/// var((x_i + x_j)/2); the vacuum value is 1/2.
inline double two_mode_quadrature_variance(const GaussianState& s, int i = 0, int j = 1) {
    require(s.n_modes >= 2 && i != j && i >= 0 && j >= 0 && i < s.n_modes && j < s.n_modes,
            "mode_count", "two-mode quadrature needs two distinct modes");
    return 0.25 * (s.cov(2 * i, 2 * i) + s.cov(2 * j, 2 * j) + 2.0 * s.cov(2 * i, 2 * j));
}

/// var((p_i + p_j)/2), conjugate to the quadrature above.
inline double two_mode_conjugate_variance(const GaussianState& s, int i = 0, int j = 1) {
    require(s.n_modes >= 2 && i != j, "mode_count", "two-mode quadrature needs two distinct modes");
    return 0.25 * (s.cov(2 * i + 1, 2 * i + 1) + s.cov(2 * j + 1, 2 * j + 1) +
                   2.0 * s.cov(2 * i + 1, 2 * j + 1));
}

/// <D^dagger D> for D = u a_i + v a_j^dagger (i == j: single-mode form).
inline double occupation_D(const GaussianState& s, const BogoliubovPair& pair, int mode_a = 0,
                           int mode_b = 0) {
    require(mode_a >= 0 && mode_b >= 0 && mode_a < s.n_modes && mode_b < s.n_modes, "mode_count",
            "mode index out of range");
    const LinearJump j{unit(s.n_modes, mode_a, pair.u), unit(s.n_modes, mode_b, pair.v), 1.0};
    return expect_jump_number(s, j);
}

struct SqueezingReport {
    double var_x = 0.0;
    double var_p = 0.0;
    double S_db = 0.0;
    std::vector<double> occ_bare;
    double occ_D = 0.0;
    std::optional<double> occ_Dbar;
    std::vector<ValidityFlag> validity_flags;
};

}  // namespace squeezecool
