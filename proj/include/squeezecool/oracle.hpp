#pragma once

// Brute-force check of the effective single-mode model: the driven qubit and
// the cavity are integrated together, with qubit decay, and the cavity moments
// are compared with the effective steady state.
//
// Lab frame:
//     H(t) = (eps/2) s_z + w0 a^+ a + g (s^+ + s^-)(a + a^+) - f(t) s_z,
//     f(t) = sum_m eta_m w_m cos(w_m t).
// The trajectory is integrated in the interaction picture of everything but
// the coupling. With phi(t) = sum_m eta_m sin(w_m t) and
// theta(t) = eps t - 2 phi(t) the coupling becomes
//     g (s^+ e^{i theta} + s^- e^{-i theta})(a e^{-i w0 t} + a^+ e^{i w0 t}),
// and the dissipators are unchanged. The cavity moments of this frame are the
// lab moments in the frame rotating at w0.

#include <squeezecool/error.hpp>
#include <squeezecool/gaussian.hpp>
#include <squeezecool/hilbert.hpp>
#include <squeezecool/master.hpp>
#include <squeezecool/singlemode.hpp>
#include <squeezecool/validity.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace squeezecool {

struct Drive {
    double omega = 0.0;
    double eta = 0.0;
};

struct FullModelParams {
    SingleModeParams base;
    std::vector<Drive> drives;
    /// Horizon; 0 picks 20 / Gamma^sq in whole strides.
    double T = 0.0;
    /// Sampling stride; 0 picks about T / 200 in whole common drive periods.
    double stride = 0.0;
    int fock_dim = 15;
    double tol = 1e-9;
    /// Upper bound on the integrator step, in units of 1/(eps + max w_d).
    double max_step_factor = 1.0;
    /// Cavity reference shift delta: drives sit at eps -+ (w0 + delta) and
    /// moments are reported in the frame rotating at w0 + delta.
    double cavity_shift = 0.0;

    /// Drives at eps -+ (w0 + shift) with the single-mode amplitudes.
    static FullModelParams from(const SingleModeParams& p, double shift = 0.0) {
        FullModelParams f;
        f.base = p;
        f.cavity_shift = shift;
        f.drives = {{p.epsilon - p.omega0 - shift, p.eta1}};
        if (p.eta2 > 0.0) f.drives.push_back({p.epsilon + p.omega0 + shift, p.eta2});
        return f;
    }

    double kappa() const { return base.omega0 / base.Q; }

    double max_drive_frequency() const {
        double w = 0.0;
        for (const auto& d : drives) w = std::max(w, d.omega);
        return w;
    }

    double max_step() const { return max_step_factor / (base.epsilon + max_drive_frequency()); }

    void validate() const {
        require(base.epsilon > 0 && base.omega0 > 0 && base.gamma_q > 0 && base.g >= 0 &&
                    base.Q > 0,
                "params", "frequencies and rates must be positive, g non-negative");
        require(fock_dim >= 2, "params", "fock_dim must be at least 2");
        require(T >= 0.0 && stride >= 0.0 && tol > 0.0 && max_step_factor > 0.0, "params",
                "horizon, stride, tolerance and step factor must be non-negative");
        for (const auto& d : drives)
            require(d.omega > 0.0 && d.eta >= 0.0, "params", "drive frequencies must be positive");
    }

    /// 2 gbar^2 / gamma_q of the effective model (0 without a valid pair).
    double gamma_sq() const {
        const double e1 = drives.size() > 0 ? drives[0].eta : 0.0;
        const double e2 = drives.size() > 1 ? drives[1].eta : 0.0;
        const double gb2 = base.g * base.g * (e1 * e1 - e2 * e2);
        return gb2 > 0.0 ? 2.0 * gb2 / base.gamma_q : 0.0;
    }

    /// Smallest P with eps, w0 and every w_d integer multiples of 2 pi / P;
    /// 0 when none exists with P <= 2 pi 1e3 / min frequency.
    double common_period() const {
        std::vector<double> w{base.epsilon, base.omega0};
        for (const auto& d : drives) w.push_back(d.omega);
        const double wmin = *std::min_element(w.begin(), w.end());
        for (int k = 1; k <= 1000; ++k) {
            const double b = wmin / k;
            bool ok = true;
            for (double x : w) ok = ok && std::abs(x / b - std::round(x / b)) < 1e-9 * (x / b);
            if (ok) return 2.0 * std::numbers::pi / b;
        }
        return 0.0;
    }

    /// Explicit stride, else about T_min / 200 snapped to whole common periods.
    double sample_stride(double t_min) const {
        if (stride > 0.0) return stride;
        const double target = t_min / 200.0;
        const double period = common_period();
        if (period <= 0.0) return target;
        return std::max(1.0, std::round(target / period)) * period;
    }

    /// Explicit T, else 20 / Gamma^sq rounded up to whole strides.
    double horizon() const {
        if (T > 0.0) return T;
        const double gsq = gamma_sq();
        require(gsq > 0.0, "params", "horizon must be given when Gamma^sq vanishes");
        const double t_min = 20.0 / gsq;
        const double h = sample_stride(t_min);
        return std::ceil(t_min / h - 1e-9) * h;
    }

    double stride_for_horizon() const {
        return stride > 0.0 ? stride : sample_stride(T > 0.0 ? T : 20.0 / gamma_sq());
    }
};

inline FockSpace full_space(const FullModelParams& p) { return FockSpace::qubit_mode(p.fock_dim); }

/// sum_m eta_m w_m cos(w_m t)
inline double drive_field(const FullModelParams& p, double t) {
    double f = 0.0;
    for (const auto& d : p.drives) f += d.eta * d.omega * std::cos(d.omega * t);
    return f;
}

/// sum_m eta_m sin(w_m t), the integral of drive_field.
inline double drive_phase(const FullModelParams& p, double t) {
    double f = 0.0;
    for (const auto& d : p.drives) f += d.eta * std::sin(d.omega * t);
    return f;
}

namespace detail {

inline LiouvillianSpec full_dissipators(const FullModelParams& p, Op hamiltonian) {
    const FockSpace s = full_space(p);
    LiouvillianSpec spec(std::move(hamiltonian), {});
    spec.add(qubit_lower(s), p.base.gamma_q);
    if (p.kappa() > 0.0) spec.add(destroy(s, 0), p.kappa());
    return spec;
}

inline Op static_lab_hamiltonian(const FullModelParams& p) {
    const FockSpace s = full_space(p);
    const Op x = destroy(s, 0) + create(s, 0);
    const Op sx = qubit_lower(s) + qubit_raise(s);
    return (0.5 * p.base.epsilon) * qubit_z(s) + p.base.omega0 * number(s, 0) + p.base.g * (sx * x);
}

}  // namespace detail

/// Generator of the lab frame frozen at time t.
inline LiouvillianSpec lab_frame_generator(const FullModelParams& p, double t) {
    p.validate();
    const FockSpace s = full_space(p);
    return detail::full_dissipators(
        p, detail::static_lab_hamiltonian(p) - drive_field(p, t) * qubit_z(s));
}

/// Lab frame as a time-dependent spec.
inline TimeDependentSpec lab_frame_spec(const FullModelParams& p) {
    p.validate();
    const FockSpace s = full_space(p);
    TimeDependentSpec spec{detail::full_dissipators(p, detail::static_lab_hamiltonian(p)),
                           {qubit_z(s)},
                           {}};
    spec.schedule = [p](double t, std::span<cplx> h, std::span<double>) {
        h[0] = -drive_field(p, t);
    };
    return spec;
}

/// Interaction picture of H0 + H_d(t); only the coupling remains.
inline TimeDependentSpec interaction_frame_spec(const FullModelParams& p) {
    p.validate();
    const FockSpace s = full_space(p);
    const Op sp = qubit_raise(s), sm = qubit_lower(s);
    const Op a = destroy(s, 0), ad = create(s, 0);
    TimeDependentSpec spec{detail::full_dissipators(p, zero_op(s)),
                           {sp * a, sm * ad, sp * ad, sm * a},
                           {}};
    const double g = p.base.g, eps = p.base.epsilon, w0 = p.base.omega0;
    spec.schedule = [p, g, eps, w0](double t, std::span<cplx> h, std::span<double>) {
        const double theta = eps * t - 2.0 * drive_phase(p, t);
        const cplx c1 = g * std::polar(1.0, theta - w0 * t);
        const cplx c2 = g * std::polar(1.0, theta + w0 * t);
        h[0] = c1;
        h[1] = std::conj(c1);
        h[2] = c2;
        h[3] = std::conj(c2);
    };
    return spec;
}

/// exp(-i int_0^t (H0 + H_d)) as a diagonal, for moving between the frames.
inline CVector free_propagator_diagonal(const FullModelParams& p, double t) {
    const FockSpace s = full_space(p);
    const double qubit_phase = 0.5 * p.base.epsilon * t - drive_phase(p, t);
    CVector d(s.dim());
    for (int i = 0; i < s.dim(); ++i) {
        const auto lv = s.levels(i);
        const double z = lv[0] == 0 ? -1.0 : 1.0;
        d(i) = std::polar(1.0, -(z * qubit_phase + p.base.omega0 * lv[1] * t));
    }
    return d;
}

/// rho_I = U0^+ rho_lab U0.
inline DensityMatrix lab_to_interaction(const FullModelParams& p, const DensityMatrix& lab, double t) {
    const CVector u = free_propagator_diagonal(p, t);
    const CMatrix r = u.conjugate().asDiagonal() * lab.matrix() * u.asDiagonal();
    return DensityMatrix(lab.space(), r);
}

// ---- Sideband structure of the coupling ---------------------------------

struct SidebandLine {
    double frequency = 0.0;
    cplx amplitude;
    cplx linear_prediction;
    /// |amplitude - prediction| / g
    double deviation = 0.0;
};

struct CouplingSpectrum {
    double g = 0.0;
    std::vector<SidebandLine> lines;
    /// max deviation / max eta^2
    double fitted_c = 0.0;
};

/// Fourier amplitudes of G(t) = g exp(-2 i phi(t)), the coefficient of s^+ once
/// the drive phase is taken out, at 0 and +-w_m. The linear prediction is
/// g at 0 and -+eta_m g at +-w_m.
inline CouplingSpectrum effective_coupling_check(const FullModelParams& p, int periods = 400) {
    p.validate();
    require(!p.drives.empty() || p.base.g >= 0.0, "params", "no drives");
    double wmin = std::numeric_limits<double>::infinity(), wmax = 1.0, emax = 0.0;
    for (const auto& d : p.drives) {
        wmin = std::min(wmin, d.omega);
        wmax = std::max(wmax, d.omega);
        emax = std::max(emax, d.eta);
    }
    if (!std::isfinite(wmin)) wmin = 1.0;
    const double window = periods * 2.0 * std::numbers::pi / wmin;
    const double dt = std::numbers::pi / (16.0 * wmax);
    const long n = static_cast<long>(std::ceil(window / dt));

    std::vector<std::pair<double, cplx>> targets{{0.0, p.base.g}};
    for (const auto& d : p.drives) {
        targets.push_back({d.omega, -d.eta * p.base.g});
        targets.push_back({-d.omega, d.eta * p.base.g});
    }
    std::vector<cplx> acc(targets.size(), 0.0);
    double wsum = 0.0;
    for (long k = 0; k < n; ++k) {
        const double t = (k + 0.5) * window / n;
        const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * t / window));
        const cplx gt = p.base.g * std::polar(1.0, -2.0 * drive_phase(p, t));
        for (std::size_t j = 0; j < targets.size(); ++j)
            acc[j] += w * gt * std::polar(1.0, -targets[j].first * t);
        wsum += w;
    }
    CouplingSpectrum out;
    out.g = p.base.g;
    for (std::size_t j = 0; j < targets.size(); ++j) {
        SidebandLine l;
        l.frequency = targets[j].first;
        l.amplitude = acc[j] / wsum;
        l.linear_prediction = targets[j].second;
        l.deviation = p.base.g > 0.0 ? std::abs(l.amplitude - l.linear_prediction) / p.base.g : 0.0;
        out.lines.push_back(l);
    }
    double dev = 0.0;
    for (const auto& l : out.lines) dev = std::max(dev, l.deviation);
    out.fitted_c = emax > 0.0 ? dev / (emax * emax) : 0.0;
    return out;
}

// ---- Full-model trajectory ----------------------------------------------

struct FullSample {
    double t = 0.0;
    /// Cavity moments in the frame rotating at w0.
    GaussianState cavity;
    double var_x = 0.0;
    double var_p = 0.0;
    double occupation = 0.0;
    double qubit_excited = 0.0;
    double cavity_purity = 0.0;
    double top_level = 0.0;
};

struct FullTrajectory {
    std::vector<FullSample> samples;
    OdeStats stats;
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double max_top_level = 0.0;
    double wall_seconds = 0.0;
};

/// Moments of a e^{i angle}: x' = x cos - p sin, p' = x sin + p cos.
inline GaussianState rotate_quadratures(const GaussianState& s, double angle) {
    RMatrix r = RMatrix::Identity(2 * s.n_modes, 2 * s.n_modes);
    for (int m = 0; m < s.n_modes; ++m) {
        r(2 * m, 2 * m) = std::cos(angle);
        r(2 * m, 2 * m + 1) = -std::sin(angle);
        r(2 * m + 1, 2 * m) = std::sin(angle);
        r(2 * m + 1, 2 * m + 1) = std::cos(angle);
    }
    return {s.n_modes, r * s.mean, r * s.cov * r.transpose()};
}

inline FullSample sample_full(double t, const DensityMatrix& rho, double frame_angle = 0.0) {
    FullSample s;
    s.t = t;
    const DensityMatrix cav = rho.trace_out_qubit();
    s.cavity = moments_from_density(cav);
    if (frame_angle != 0.0) s.cavity = rotate_quadratures(s.cavity, frame_angle);
    s.var_x = s.cavity.var_x(0);
    s.var_p = s.cavity.var_p(0);
    s.occupation = occupation(s.cavity, 0);
    const int m = cav.dim();
    s.qubit_excited = rho.matrix().bottomRightCorner(m, m).trace().real();
    s.cavity_purity = (cav.matrix() * cav.matrix()).trace().real();
    s.top_level = max_top_level_population(cav.space(), cav.matrix());
    return s;
}

/// Integrates the full model from (qubit ground, cavity vacuum).
inline FullTrajectory simulate_full(const FullModelParams& p) {
    p.validate();
    const auto start = std::chrono::steady_clock::now();
    const FockSpace s = full_space(p);
    const double T = p.horizon();
    FullTrajectory tr;
    EvolveOptions o;
    o.tol = p.tol;
    o.max_step = p.max_step();
    o.sample_stride = p.stride_for_horizon();
    o.observer = [&tr, &p](double t, const DensityMatrix& rho) {
        tr.samples.push_back(sample_full(t, rho, p.cavity_shift * t));
        tr.max_top_level = std::max(tr.max_top_level, tr.samples.back().top_level);
    };
    const EvolveResult r =
        evolve(DensityMatrix::vacuum(s), Generator(interaction_frame_spec(p)), 0.0, T, o);
    tr.stats = r.stats;
    tr.max_trace_error = r.max_trace_error;
    tr.max_hermiticity_error = r.max_hermiticity_error;
    tr.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(tr.max_top_level < 1e-4, "truncation",
            "cavity top-level population " + std::to_string(tr.max_top_level) +
                " too large for fock_dim " + std::to_string(p.fock_dim));
    return tr;
}

// ---- Comparison -----------------------------------------------------------

struct DiscrepancyReport {
    double var_x_full = 0.0;
    double var_p_full = 0.0;
    double occ_full = 0.0;
    double var_x_effective = 0.0;
    double var_p_effective = 0.0;
    double occ_effective = 0.0;
    double rel_var_x = 0.0;
    double rel_var_p = 0.0;
    double rel_occ = 0.0;
    /// Relative spread of var(x) over the last 10% of the horizon.
    double late_drift = 0.0;
    double max_qubit_excited = 0.0;
    double gsq_over_gammaq = 0.0;
    double gammaq_over_min_E = 0.0;
};

inline double relative_error(double a, double b) {
    const double scale = std::max(std::abs(b), 1e-300);
    return std::abs(a - b) / scale;
}

/// Late-time full-model moments against an effective steady state.
inline DiscrepancyReport compare_effective(const FullTrajectory& tr, const GaussianState& effective,
                                           const FullModelParams& p, double drift_tol = 0.01) {
    require(tr.samples.size() >= 2, "trajectory", "trajectory has fewer than two samples");
    const double t_end = tr.samples.back().t;
    const double t_tail = tr.samples.front().t + 0.9 * (t_end - tr.samples.front().t);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    DiscrepancyReport r;
    for (const auto& s : tr.samples) {
        r.max_qubit_excited = std::max(r.max_qubit_excited, s.qubit_excited);
        if (s.t >= t_tail) {
            lo = std::min(lo, s.var_x);
            hi = std::max(hi, s.var_x);
        }
    }
    const FullSample& last = tr.samples.back();
    r.late_drift = (hi - lo) / std::max(std::abs(last.var_x), 1e-300);
    require(r.late_drift < drift_tol, "not_settled",
            "var(x) drifts by " + std::to_string(r.late_drift) + " over the last 10% of the horizon");
    r.var_x_full = last.var_x;
    r.var_p_full = last.var_p;
    r.occ_full = last.occupation;
    r.var_x_effective = effective.var_x(0);
    r.var_p_effective = effective.var_p(0);
    r.occ_effective = occupation(effective, 0);
    r.rel_var_x = relative_error(r.var_x_full, r.var_x_effective);
    r.rel_var_p = relative_error(r.var_p_full, r.var_p_effective);
    r.rel_occ = relative_error(r.occ_full, r.occ_effective);
    r.gsq_over_gammaq = p.gamma_sq() / p.base.gamma_q;
    double emin = std::numeric_limits<double>::infinity();
    if (p.drives.size() == 2 && p.base.eta1 > p.base.eta2) {
        for (const auto& c : sideband_decomposition(p.base).corrections)
            emin = std::min(emin, std::abs(c.E_lambda));
    } else {
        emin = std::min(p.base.epsilon - p.base.omega0, 2.0 * p.base.omega0);
    }
    r.gammaq_over_min_E = p.base.gamma_q / emin;
    return r;
}

}  // namespace squeezecool
