#pragma once

// Effective single-mode cavity model: a qubit driven at omega_d1 = eps - w0
// and omega_d2 = eps + w0 and eliminated adiabatically leaves the squeezing
// dissipator on D = u a + v a^dagger, seven fast-rotating correction channels
// with complex rates, and cavity loss.

#include <squeezecool/error.hpp>
#include <squeezecool/gaussian.hpp>
#include <squeezecool/hilbert.hpp>
#include <squeezecool/master.hpp>
#include <squeezecool/validity.hpp>

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace squeezecool {

struct SingleModeParams {
    double epsilon = 10.0;
    double omega0 = 3.5;
    double gamma_q = 0.2;
    double g = 1.0;
    double eta1 = 0.2;
    double eta2 = 0.12;
    double Q = 1e8;
    int fock_dim = 41;

    double omega_d1() const { return epsilon - omega0; }
    double omega_d2() const { return epsilon + omega0; }

    void validate() const {
        require(epsilon > 0 && omega0 > 0 && gamma_q > 0 && g > 0 && Q > 0, "params",
                "frequencies, rates, coupling and Q must be positive");
        require(eta2 >= 0.0 && eta1 > eta2, "eta_order",
                "need eta1 > eta2 >= 0 (otherwise gbar is imaginary)");
        require(omega_d1() > 0.0, "params", "need epsilon > omega0 for a positive red drive");
        require(fock_dim >= 2, "params", "fock_dim must be at least 2");
    }
};

enum class OpKind { Ddag, a, adag };

inline const char* to_string(OpKind k) {
    switch (k) {
        case OpKind::Ddag: return "Ddag";
        case OpKind::a: return "a";
        case OpKind::adag: return "adag";
    }
    return "?";
}

struct Correction {
    OpKind op;
    double g_lambda;
    double E_lambda;
};

struct SidebandDecomposition {
    BogoliubovPair pair;
    std::array<Correction, 7> corrections;
};

inline SidebandDecomposition sideband_decomposition(const SingleModeParams& p) {
    p.validate();
    const double gbar = p.g * std::sqrt(p.eta1 * p.eta1 - p.eta2 * p.eta2);
    BogoliubovPair pair{p.eta1 * p.g / gbar, p.eta2 * p.g / gbar, gbar};
    pair.validate();
    const double wd1 = p.omega_d1(), wd2 = p.omega_d2();
    return {pair,
            {{{OpKind::Ddag, -gbar, -2.0 * p.epsilon},
              {OpKind::a, p.g, -wd1},
              {OpKind::a, -p.eta1 * p.g, -2.0 * wd1},
              {OpKind::a, p.eta2 * p.g, 2.0 * p.omega0},
              {OpKind::adag, p.g, -wd2},
              {OpKind::adag, -p.eta2 * p.g, -2.0 * wd2},
              {OpKind::adag, p.eta1 * p.g, -2.0 * p.omega0}}}};
}

struct EffectiveRates {
    cplx gamma_sq;
    std::array<cplx, 7> gamma_lambda;
    double kappa;
};

inline EffectiveRates effective_rates(const SingleModeParams& p, const SidebandDecomposition& dec) {
    EffectiveRates r;
    r.gamma_sq = 2.0 * dec.pair.gbar * dec.pair.gbar / p.gamma_q;
    for (std::size_t k = 0; k < 7; ++k) {
        const auto& c = dec.corrections[k];
        r.gamma_lambda[k] = 2.0 * c.g_lambda * c.g_lambda / cplx(p.gamma_q, -c.E_lambda);
    }
    r.kappa = p.omega0 / p.Q;
    return r;
}

struct SingleModeOptions {
    bool include_corrections = true;
    bool include_loss = true;
    /// Keep Im(Gamma^lambda). Dropping it removes the frequency shifts the
    /// corrections induce and keeps only their heating/cooling parts.
    bool correction_shifts = true;
};

/// Coefficients (c, d) of O = c a + d a^dagger for each operator kind.
inline std::pair<double, double> op_coefficients(OpKind k, const BogoliubovPair& pair) {
    switch (k) {
        case OpKind::Ddag: return {pair.v, pair.u};
        case OpKind::a: return {1.0, 0.0};
        case OpKind::adag: return {0.0, 1.0};
    }
    return {0.0, 0.0};
}

inline GaussianModel single_mode_model(const SingleModeParams& p, const SingleModeOptions& o = {}) {
    const SidebandDecomposition dec = sideband_decomposition(p);
    const EffectiveRates r = effective_rates(p, dec);
    GaussianModel m(1);
    m.add_jump(unit(1, 0, dec.pair.u), unit(1, 0, dec.pair.v), r.gamma_sq);
    if (o.include_corrections) {
        for (std::size_t k = 0; k < 7; ++k) {
            const auto [c, d] = op_coefficients(dec.corrections[k].op, dec.pair);
            const cplx gam = o.correction_shifts ? r.gamma_lambda[k] : cplx(r.gamma_lambda[k].real());
            m.add_jump(unit(1, 0, c), unit(1, 0, d), gam);
        }
    }
    if (o.include_loss) m.add_jump(unit(1, 0), CVector::Zero(1), r.kappa);
    return m;
}

inline LiouvillianSpec build_single_mode_liouvillian(const SingleModeParams& p,
                                                     const SingleModeOptions& o = {}) {
    return fock_spec(single_mode_model(p, o), FockSpace::single(p.fock_dim));
}

/// Net a^dagger a coefficient generated by Im(Gamma^lambda) of the
/// correction channels (each contributes Im(Gamma)/2 O^dagger O).
inline double correction_frequency_shift(const SingleModeParams& p) {
    const SidebandDecomposition dec = sideband_decomposition(p);
    const EffectiveRates r = effective_rates(p, dec);
    double shift = 0.0;
    for (std::size_t k = 0; k < 7; ++k) {
        const auto [c, d] = op_coefficients(dec.corrections[k].op, dec.pair);
        shift += 0.5 * r.gamma_lambda[k].imag() * (c * c + d * d);
    }
    return shift;
}

struct SingleModeThresholds {
    double gsq_over_gammaq = 0.1;
    double gammaq_over_freq = 0.1;
    double kappa_over_gsq = 0.1;
};

inline std::vector<ValidityFlag> single_mode_validity(const SingleModeParams& p,
                                                      const SingleModeThresholds& t = {}) {
    const SidebandDecomposition dec = sideband_decomposition(p);
    const EffectiveRates r = effective_rates(p, dec);
    double min_e = p.epsilon;
    for (double f : {p.omega0, p.omega_d1(), p.omega_d2()}) min_e = std::min(min_e, f);
    return {{"gsq_over_gammaq", r.gamma_sq.real() / p.gamma_q, t.gsq_over_gammaq},
            {"gammaq_over_min_freq", p.gamma_q / min_e, t.gammaq_over_freq},
            {"kappa_over_gsq", r.kappa / r.gamma_sq.real(), t.kappa_over_gsq}};
}

}  // namespace squeezecool
