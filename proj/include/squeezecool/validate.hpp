#pragma once

// Seeded invariant checks shared by the `validate` subcommand and the
// acceptance run.

#include <squeezecool/continuum.hpp>
#include <squeezecool/gaussian.hpp>
#include <squeezecool/master.hpp>
#include <squeezecool/metrics.hpp>
#include <squeezecool/singlemode.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace squeezecool {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

namespace detail {

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

inline double rel_cov_diff(const GaussianState& a, const GaussianState& b) {
    return (a.cov - b.cov).cwiseAbs().maxCoeff() / b.cov.cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Literal (Gamma/2)(O rho O^+ - O^+ O rho) + H.c. against the decomposed
/// generator, relative to max(1, |O|^2).
inline CheckResult check_complex_rate_identity(std::uint64_t seed, int instances = 100) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dims(2, 8);
    double worst = 0.0;
    for (int k = 0; k < instances; ++k) {
        const int d = dims(rng);
        const FockSpace s = FockSpace::single(d);
        const CMatrix o = detail::random_matrix(rng, d);
        const CMatrix rho = detail::random_density(rng, d);
        const cplx g = detail::random_rate(rng);
        const CMatrix half = 0.5 * g * (o * rho * o.adjoint() - o.adjoint() * o * rho);
        const CMatrix literal = half + half.adjoint();
        LiouvillianSpec spec(s);
        spec.add(Op(s, o), g);
        const CMatrix diff = apply_liouvillian(spec, rho) - literal;
        worst = std::max(worst, diff.cwiseAbs().maxCoeff() / std::max(1.0, o.squaredNorm()));
    }
    return {"complex_rate_identity", worst <= 1e-12, worst, 1e-12,
            std::to_string(instances) + " random instances"};
}

/// Random generators evolved from random states; evolve() enforces trace and
/// Hermiticity along the path and positivity of every returned state.
inline CheckResult check_evolution_invariants(std::uint64_t seed, int instances = 10) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dims(2, 6);
    double worst_tr = 0.0, worst_herm = 0.0, worst_neg = 0.0;
    std::string detail = std::to_string(instances) + " random evolutions";
    bool ok = true;
    for (int k = 0; k < instances; ++k) {
        const int d = dims(rng);
        const FockSpace s = FockSpace::single(d);
        const CMatrix x = detail::random_matrix(rng, d);
        const CMatrix h = 0.25 * (x + x.adjoint());
        LiouvillianSpec spec(Op(s, h), {});
        spec.add(Op(s, 0.5 * detail::random_matrix(rng, d)), detail::random_rate(rng));
        spec.add(destroy(s, 0), detail::random_rate(rng));
        try {
            EvolveOptions o;
            const EvolveResult r =
                evolve(DensityMatrix(s, detail::random_density(rng, d)), Generator(spec), 0.0, 2.0, o);
            worst_tr = std::max(worst_tr, r.max_trace_error);
            worst_herm = std::max(worst_herm, r.max_hermiticity_error);
            worst_neg = std::max(worst_neg, -r.state.min_eigenvalue());
        } catch (const Error& e) {
            ok = false;
            detail = e.code() + ": " + e.what();
        }
    }
    const double worst = std::max(worst_tr, worst_herm);
    ok = ok && worst <= 1e-8 && worst_neg <= DensityMatrix::kPosTol;
    return {"evolution_invariants", ok, std::max(worst, worst_neg), 1e-8, detail};
}

/// S_db of the ideal single-mode model against -10 log10((u - v)^2).
inline CheckResult check_ideal_closure() {
    double worst = 0.0;
    for (int i = 1; i < 25; ++i) {
        SingleModeParams p;
        p.eta2 = p.eta1 * 0.04 * i;
        const BogoliubovPair pair = sideband_decomposition(p).pair;
        const GaussianState s = lyapunov_steady(single_mode_model(p, {false, false}));
        const double ideal = -10.0 * std::log10(std::pow(pair.u - pair.v, 2));
        worst = std::max(worst, std::abs(squeezing_db(s.var_x(0)) - ideal));
    }
    return {"ideal_single_mode_closure_db", worst <= 1e-9, worst, 1e-9, "24 drive ratios"};
}

inline CheckResult check_bogoliubov_identity(std::uint64_t seed, int instances = 100) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        SingleModeParams p;
        p.eta1 = 0.01 + 0.5 * uni(rng);
        p.eta2 = p.eta1 * 0.999 * uni(rng);
        p.g = 0.01 + 2.0 * uni(rng);
        const BogoliubovPair b = sideband_decomposition(p).pair;
        worst = std::max(worst, std::abs(b.residual()) / (b.u * b.u));
    }
    return {"bogoliubov_identity", worst <= 1e-12, worst, 1e-12,
            std::to_string(instances) + " random drive sets"};
}

/// <D^+ D> + <D-bar^+ D-bar> of the ideal averaged generator over the band.
inline CheckResult check_continuum_dark_state(const ContinuumParams& p = {}) {
    double worst = 0.0;
    for (double nu : p.grid()) {
        const PairModel d = pair_parameters(nu, p, DriveConfig::D);
        const PairModel b = pair_parameters(nu, p, DriveConfig::Dbar);
        const GaussianState s = lyapunov_steady(
            averaged(pair_model(d, {false, false}), pair_model(b, {false, false})));
        const SqueezingReport r = pair_report(s, d, b);
        worst = std::max(worst, r.occ_D + *r.occ_Dbar);
    }
    return {"continuum_dark_state", worst < 1e-8, worst, 1e-8,
            std::to_string(p.n_nu) + " grid points"};
}

struct EquivalenceCase {
    std::string kind;
    double rel_diff = 0.0;
    double top_level = 0.0;
};

/// Fock against Gaussian steady-state covariance on random single-mode sets
/// and random nu = 0 pairs with v <= 1, all with corrections and loss. Pair
/// truncation grows from 14 levels until the top-level rule holds.
inline std::vector<EquivalenceCase> backend_equivalence_cases(std::uint64_t seed, int single_cases,
                                                              int pair_cases) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<EquivalenceCase> out;
    for (int k = 0; k < single_cases; ++k) {
        SingleModeParams p;
        p.g = 0.1 + 0.4 * uni(rng);
        p.eta2 = p.eta1 * 0.5 * uni(rng);
        p.Q = std::pow(10.0, 2.0 + 2.0 * uni(rng));
        p.fock_dim = 50;
        const GaussianState g = lyapunov_steady(single_mode_model(p));
        const DensityMatrix rho = steady_state(build_single_mode_liouvillian(p));
        out.push_back({"single_mode", detail::rel_cov_diff(moments_from_density(rho), g),
                       max_top_level_population(rho.space(), rho.matrix())});
    }
    for (int k = 0; k < pair_cases; ++k) {
        ContinuumParams p;
        p.eta2 = p.eta1 * (0.1 + 0.5 * uni(rng));
        p.Q = std::pow(10.0, 3.0 + 2.0 * uni(rng));
        const PairModel d = pair_parameters(0.0, p, DriveConfig::D);
        const PairModel b = pair_parameters(0.0, p, DriveConfig::Dbar);
        require(d.pair.v <= 1.0, "params", "pair case with v > 1");
        const GaussianModel m = averaged(pair_model(d, {true, true}), pair_model(b, {true, true}));
        const GaussianState g = lyapunov_steady(m);
        DensityMatrix rho = steady_state(fock_spec(m, FockSpace::pair(14, 14)));
        for (int dim = 16; dim <= 20 && max_top_level_population(rho.space(), rho.matrix()) >= kTruncationThreshold;
             dim += 2)
            rho = steady_state(fock_spec(m, FockSpace::pair(dim, dim)));
        out.push_back({"pair_nu0", detail::rel_cov_diff(moments_from_density(rho), g),
                       max_top_level_population(rho.space(), rho.matrix())});
    }
    return out;
}

inline CheckResult check_backend_equivalence(std::uint64_t seed, int single_cases = 10,
                                             int pair_cases = 10) {
    double worst = 0.0;
    bool trunc_ok = true;
    for (const auto& c : backend_equivalence_cases(seed, single_cases, pair_cases)) {
        worst = std::max(worst, c.rel_diff);
        trunc_ok = trunc_ok && c.top_level < kTruncationThreshold;
    }
    return {"backend_equivalence", worst <= 1e-6 && trunc_ok, worst, 1e-6,
            std::to_string(single_cases + pair_cases) + " random parameter sets" +
                (trunc_ok ? "" : ", truncation inadequate")};
}

inline std::vector<CheckResult> validation_suite(std::uint64_t seed, int equivalence_cases = 20) {
    const int single = equivalence_cases / 2;
    return {check_complex_rate_identity(seed),
            check_evolution_invariants(seed + 1),
            check_ideal_closure(),
            check_bogoliubov_identity(seed + 2),
            check_continuum_dark_state(),
            check_backend_equivalence(seed + 3, single, equivalence_cases - single)};
}

}  // namespace squeezecool
