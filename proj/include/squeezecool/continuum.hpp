#pragma once

// Waveguide model: Ohmic couplings, independent two-mode pairs
// (omega_a + nu, omega_b - nu), the D and D-bar drive configurations, their
// average, and the stroboscopic alternation between them.
//
// Mode 0 of every pair is omega_a + nu, mode 1 is omega_b - nu.

#include <squeezecool/error.hpp>
#include <squeezecool/gaussian.hpp>
#include <squeezecool/hilbert.hpp>
#include <squeezecool/master.hpp>
#include <squeezecool/metrics.hpp>
#include <squeezecool/parallel.hpp>
#include <squeezecool/validity.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace squeezecool {

/// How the D-bar dissipator of a pair is parametrized.
///   matched: D-bar = u b + v a^dagger with the same (u, v, gbar) as D, so the
///            two commute at every nu (the averaged generator of the model).
///   drive:   (u, v, gbar) recomputed from the bar drive amplitudes; agrees
///            with `matched` only at nu = 0.
enum class BarCoupling { matched, drive };

struct ContinuumParams {
    double epsilon = 15.0;
    double omega_a = 3.0;
    double omega_b = 2.4;
    double alpha = 6e-4;
    double delta_omega = 0.01;
    double nu_max = 0.25;
    int n_nu = 41;
    double Q = 1e5;
    double eta1 = 0.2;
    double eta2 = 0.2;
    /// Half-cycle duration; 0 selects strobe_dt_factor / |Gamma^sq_0|.
    double strobe_dt = 0.0;
    double strobe_dt_factor = 1e-3;
    int fock_dim = 12;
    /// Offset in E_1(omega) = omega + omega_ref; NaN selects omega_a.
    double omega_ref = std::numeric_limits<double>::quiet_NaN();
    BarCoupling bar = BarCoupling::matched;
    double freq_ratio_threshold = 0.3;

    double reference() const { return std::isnan(omega_ref) ? omega_a : omega_ref; }

    void validate() const {
        require(epsilon > 0 && omega_a > 0 && omega_b > 0 && alpha > 0 && delta_omega > 0 && Q > 0,
                "params", "frequencies, alpha, delta_omega and Q must be positive");
        require(omega_a != omega_b, "params", "omega_a must differ from omega_b");
        require(nu_max >= 0.0 && n_nu >= 1, "params", "need nu_max >= 0 and n_nu >= 1");
        require(omega_b - nu_max > 0.0 && omega_a - nu_max > 0.0, "params",
                "band reaches non-positive mode frequencies");
        require(eta1 > 0.0 && eta2 >= 0.0, "params", "drive amplitudes must be non-negative");
        require(strobe_dt >= 0.0 && strobe_dt_factor > 0.0, "params", "bad stroboscopic step");
        // gbar_nu^2 is linear in nu, so checking the band edges covers the band.
        for (double nu : {-nu_max, nu_max}) {
            require(eta1 * eta1 * (omega_a + nu) > eta2 * eta2 * (omega_b - nu), "imaginary_gbar",
                    "eta1^2 g^2(omega_a + nu) <= eta2^2 g^2(omega_b - nu) inside the band");
            if (bar == BarCoupling::drive) {
                const double eb1 = eta1 * std::sqrt(omega_a / omega_b);
                const double eb2 = eta2 * std::sqrt(omega_b / omega_a);
                require(eb1 * eb1 * (omega_b - nu) > eb2 * eb2 * (omega_a + nu), "imaginary_gbar",
                        "bar-drive coupling is imaginary inside the band");
            }
        }
    }

    std::vector<double> grid() const {
        std::vector<double> nu(n_nu);
        for (int i = 0; i < n_nu; ++i)
            nu[i] = n_nu == 1 ? 0.0 : -nu_max + 2.0 * nu_max * i / (n_nu - 1);
        return nu;
    }
};

/// g_omega = sqrt(2 alpha delta_omega omega).
inline double coupling(double omega, double alpha, double delta_omega) {
    require(omega > 0.0, "frequency", "coupling needs omega > 0");
    return std::sqrt(2.0 * alpha * delta_omega * omega);
}

/// gamma_q = 2 pi alpha epsilon.
inline double qubit_decay(double alpha, double epsilon) {
    return 2.0 * std::numbers::pi * alpha * epsilon;
}

enum class DriveConfig { D, Dbar };

enum class LadderKind { a, adag };

/// A linear channel on one mode of the pair.
struct ModeChannel {
    int mode;
    LadderKind kind;
    double amplitude;
    double E;
    cplx rate;
};

struct PairModel {
    double nu = 0.0;
    DriveConfig config = DriveConfig::D;
    BogoliubovPair pair;
    cplx gamma_sq;
    /// Jump coefficients of the squeezing operator on (mode 0, mode 1).
    CVector c, d;
    std::vector<ModeChannel> corrections;
    double kappa = 0.0;
};

/// Bar-configuration drive amplitudes.
inline std::pair<double, double> bar_etas(const ContinuumParams& p) {
    const double ga = coupling(p.omega_a, p.alpha, p.delta_omega);
    const double gb = coupling(p.omega_b, p.alpha, p.delta_omega);
    return {p.eta1 * ga / gb, p.eta2 * gb / ga};
}

inline PairModel pair_parameters(double nu, const ContinuumParams& p, DriveConfig config) {
    p.validate();
    const double gq = qubit_decay(p.alpha, p.epsilon);
    const double w0 = p.omega_a + nu, w1 = p.omega_b - nu;
    const double g0 = coupling(w0, p.alpha, p.delta_omega);
    const double g1 = coupling(w1, p.alpha, p.delta_omega);

    PairModel pm;
    pm.nu = nu;
    pm.config = config;

    // (u, v, gbar) of D: u a_0 + v a_1^dagger.
    auto make_pair = [](double e1, double ga, double e2, double gb) {
        const double gbar2 = e1 * e1 * ga * ga - e2 * e2 * gb * gb;
        require(gbar2 > 0.0, "imaginary_gbar",
                "eta1^2 g^2 <= eta2^2 g^2: squeezing coupling is imaginary");
        const double gbar = std::sqrt(gbar2);
        BogoliubovPair bp{e1 * ga / gbar, e2 * gb / gbar, gbar};
        bp.validate();
        return bp;
    };

    const auto [eb1, eb2] = bar_etas(p);
    double drive1 = p.eta1, drive2 = p.eta2;
    if (config == DriveConfig::D) {
        pm.pair = make_pair(p.eta1, g0, p.eta2, g1);
        pm.gamma_sq = pm.pair.gbar * pm.pair.gbar / cplx(gq, -nu);
        pm.c = unit(2, 0, pm.pair.u);
        pm.d = unit(2, 1, pm.pair.v);
    } else {
        drive1 = eb1;
        drive2 = eb2;
        // Both modes of the bar sideband rotate as e^{+i nu t}.
        pm.pair = p.bar == BarCoupling::matched ? make_pair(p.eta1, g0, p.eta2, g1)
                                                : make_pair(eb1, g1, eb2, g0);
        pm.gamma_sq = pm.pair.gbar * pm.pair.gbar / cplx(gq, nu);
        pm.c = unit(2, 1, pm.pair.u);
        pm.d = unit(2, 0, pm.pair.v);
    }

    const double ref = p.reference();
    const double g_mode[2] = {g0, g1};
    const double w_mode[2] = {w0, w1};
    for (int m = 0; m < 2; ++m) {
        const double e1 = w_mode[m] + ref;
        const double a1 = drive1 * g_mode[m], a2 = drive2 * g_mode[m];
        pm.corrections.push_back({m, LadderKind::a, a1, e1, a1 * a1 / cplx(gq, -e1)});
        pm.corrections.push_back({m, LadderKind::adag, a2, -e1, a2 * a2 / cplx(gq, e1)});
    }
    pm.kappa = p.delta_omega / p.Q;
    return pm;
}

struct PairOptions {
    bool corrections = true;
    bool loss = true;
};

inline GaussianModel pair_model(const PairModel& pm, const PairOptions& o = {}) {
    GaussianModel m(2);
    m.add_jump(pm.c, pm.d, pm.gamma_sq);
    if (o.corrections) {
        for (const auto& ch : pm.corrections) {
            if (ch.kind == LadderKind::a)
                m.add_jump(unit(2, ch.mode), CVector::Zero(2), ch.rate);
            else
                m.add_jump(CVector::Zero(2), unit(2, ch.mode), ch.rate);
        }
    }
    if (o.loss)
        for (int k = 0; k < 2; ++k) m.add_jump(unit(2, k), CVector::Zero(2), pm.kappa);
    return m;
}

inline LiouvillianSpec build_pair_liouvillian(const PairModel& pm, const PairOptions& o,
                                              int fock_dim) {
    return fock_spec(pair_model(pm, o), FockSpace::pair(fock_dim, fock_dim));
}

/// Model with every rate scaled by `weight`.
inline GaussianModel scaled(GaussianModel m, double weight) {
    m.hamiltonian *= weight;
    for (auto& j : m.jumps) j.gamma *= weight;
    return m;
}

/// (L_a + L_b) / 2.
inline GaussianModel averaged(const GaussianModel& a, const GaussianModel& b) {
    require(a.n_modes == b.n_modes, "mode_count", "models differ in mode count");
    GaussianModel m = scaled(a, 0.5);
    const GaussianModel hb = scaled(b, 0.5);
    m.hamiltonian += hb.hamiltonian;
    m.jumps.insert(m.jumps.end(), hb.jumps.begin(), hb.jumps.end());
    return m;
}

struct PairReport {
    double nu = 0.0;
    PairModel d_model;
    PairModel dbar_model;
    GaussianState state;
    SqueezingReport report;
    double var_x_unscaled = 0.0;
    std::string status = "ok";
};

inline SqueezingReport pair_report(const GaussianState& s, const PairModel& dm, const PairModel& bm) {
    SqueezingReport r;
    r.var_x = two_mode_quadrature_variance(s);
    r.var_p = two_mode_conjugate_variance(s);
    r.S_db = squeezing_db(r.var_x, 0.5);
    r.occ_bare = {occupation(s, 0), occupation(s, 1)};
    r.occ_D = expect_jump_number(s, {dm.c, dm.d, 1.0});
    r.occ_Dbar = expect_jump_number(s, {bm.c, bm.d, 1.0});
    return r;
}

struct StroboscopicOptions {
    PairOptions pair;
    double tol = 1e-10;
    long max_iterations = 1'000'000;
    /// 0: take ContinuumParams::strobe_dt / strobe_dt_factor.
    double dt = 0.0;
};

struct StroboscopicResult {
    GaussianState fixed_point;  // at the end of a D half-cycle
    GaussianState averaged;
    double dt = 0.0;
    long iterations = 0;
    double contraction = 0.0;   // spectral radius of the cycle's Phi, squared
    GaussianChannel half_d;
    GaussianChannel half_dbar;
};

inline double strobe_dt(const ContinuumParams& p, const PairModel& d0) {
    return p.strobe_dt > 0.0 ? p.strobe_dt : p.strobe_dt_factor / std::abs(d0.gamma_sq);
}

/// Fixed point of V -> Phi V Phi^T + Q by iteration from `start`. Stops when
/// the a-posteriori bound diff * rho / (1 - rho) drops below tol, where rho is
/// the squared spectral radius of Phi.
inline std::pair<GaussianState, long> channel_fixed_point(const GaussianChannel& ch,
                                                          GaussianState start, double tol,
                                                          long max_iterations, double* rho_out = nullptr) {
    const double sr = ch.phi.eigenvalues().cwiseAbs().maxCoeff();
    const double rho = sr * sr;
    if (rho_out) *rho_out = rho;
    require(rho < 1.0, "non_contraction", "stroboscopic map is not contractive");
    const double amplify = rho / (1.0 - rho);
    for (long k = 1; k <= max_iterations; ++k) {
        GaussianState next = ch(start);
        const double diff = (next.cov - start.cov).cwiseAbs().maxCoeff() +
                            (next.mean - start.mean).cwiseAbs().maxCoeff();
        start = std::move(next);
        if (diff * amplify < tol || diff == 0.0) return {start, k};
    }
    throw Error("non_convergence", "stroboscopic iteration did not converge");
}

inline StroboscopicResult stroboscopic_steady(double nu, const ContinuumParams& p,
                                              const StroboscopicOptions& o = {}) {
    const PairModel dm = pair_parameters(nu, p, DriveConfig::D);
    const PairModel bm = pair_parameters(nu, p, DriveConfig::Dbar);
    const GaussianModel md = pair_model(dm, o.pair), mb = pair_model(bm, o.pair);
    StroboscopicResult r;
    r.dt = o.dt > 0.0 ? o.dt : strobe_dt(p, pair_parameters(0.0, p, DriveConfig::D));
    r.half_d = covariance_channel(drift_diffusion(md), r.dt);
    r.half_dbar = covariance_channel(drift_diffusion(mb), r.dt);
    const GaussianChannel cycle = r.half_d.after(r.half_dbar);
    auto [fp, it] = channel_fixed_point(cycle, GaussianState::vacuum(2), o.tol, o.max_iterations,
                                        &r.contraction);
    r.fixed_point = std::move(fp);
    r.iterations = it;
    r.averaged = lyapunov_steady(averaged(md, mb));
    return r;
}

enum class ContinuumDynamics { averaged, stroboscopic };

struct BandOptions {
    PairOptions pair;
    ContinuumDynamics dynamics = ContinuumDynamics::stroboscopic;
    unsigned jobs = 1;
};

inline std::vector<ValidityFlag> continuum_validity(const ContinuumParams& p, double nu,
                                                    double dt = 0.0) {
    const double gq = qubit_decay(p.alpha, p.epsilon);
    const PairModel d0 = pair_parameters(0.0, p, DriveConfig::D);
    const PairModel dn = pair_parameters(nu, p, DriveConfig::D);
    double sum_gsq = 0.0;
    for (double x : p.grid()) sum_gsq += std::abs(pair_parameters(x, p, DriveConfig::D).gamma_sq);
    double corr = 0.0;
    for (const auto& ch : d0.corrections) corr = std::max(corr, ch.rate.real());
    const double wmin = std::min(p.omega_a, p.omega_b), wmax = std::max(p.omega_a, p.omega_b);
    std::vector<ValidityFlag> f = {
        {"omega_over_epsilon", wmax / p.epsilon, p.freq_ratio_threshold},
        {"alpha", p.alpha, 0.01},
        {"sum_gsq_over_gammaq", sum_gsq / gq, 0.1},
        {"rwa_gsq0_over_delta_omega", 2.0 * std::abs(d0.gamma_sq) / p.delta_omega, 1.0},
        {"corrections_over_gsq0", corr / d0.gamma_sq.real(), 0.1},
        {"gammaq_over_omega", gq / wmin, 0.1},
        {"omega_over_gammaq", wmax / gq, 0.1},
        {"kappa_over_gsq0", d0.kappa / d0.gamma_sq.real(), 0.1},
    };
    if (dt > 0.0) f.push_back({"strobe_dt_times_gsq", dt * std::abs(dn.gamma_sq), 0.1});
    return f;
}

inline PairReport pair_point(double nu, const ContinuumParams& p, const BandOptions& o) {
    PairReport pr;
    pr.nu = nu;
    pr.d_model = pair_parameters(nu, p, DriveConfig::D);
    pr.dbar_model = pair_parameters(nu, p, DriveConfig::Dbar);
    double dt = 0.0;
    if (o.dynamics == ContinuumDynamics::stroboscopic) {
        StroboscopicOptions so;
        so.pair = o.pair;
        const StroboscopicResult r = stroboscopic_steady(nu, p, so);
        pr.state = r.fixed_point;
        dt = r.dt;
    } else {
        pr.state = lyapunov_steady(
            averaged(pair_model(pr.d_model, o.pair), pair_model(pr.dbar_model, o.pair)));
    }
    pr.report = pair_report(pr.state, pr.d_model, pr.dbar_model);
    pr.report.validity_flags = continuum_validity(p, nu, dt);
    pr.var_x_unscaled = pr.report.var_x;
    return pr;
}

/// One report per grid point, in grid order. A failing point is recorded with
/// its error code in `status` and does not abort the sweep.
inline std::vector<PairReport> band_sweep(const ContinuumParams& p, const BandOptions& o = {}) {
    p.validate();
    const std::vector<double> nus = p.grid();
    std::vector<PairReport> out(nus.size());
    parallel_for(nus.size(), o.jobs, [&](std::size_t i) {
        try {
            out[i] = pair_point(nus[i], p, o);
        } catch (const Error& e) {
            out[i] = PairReport{};
            out[i].nu = nus[i];
            out[i].status = e.code();
        }
    });
    return out;
}

/// S_db at nu for omega_ref in {omega_a, omega_b, (omega_a + omega_b)/2}.
inline std::vector<std::pair<double, double>> omega_ref_sensitivity(ContinuumParams p, double nu,
                                                                    const BandOptions& o = {}) {
    std::vector<std::pair<double, double>> out;
    for (double ref : {p.omega_a, p.omega_b, 0.5 * (p.omega_a + p.omega_b)}) {
        p.omega_ref = ref;
        out.emplace_back(ref, pair_point(nu, p, o).report.S_db);
    }
    return out;
}

}  // namespace squeezecool
