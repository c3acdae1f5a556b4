#include <squeezecool/continuum.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace squeezecool;

namespace {

double max_abs(const RMatrix& m) { return m.cwiseAbs().maxCoeff(); }

double rel_diff(const RMatrix& a, const RMatrix& b) { return max_abs(a - b) / max_abs(b); }

RMatrix two_mode_squeezed_cov(double u, double v) {
    RMatrix c = RMatrix::Identity(4, 4) * (u * u + v * v);
    c(0, 2) = c(2, 0) = -2.0 * u * v;
    c(1, 3) = c(3, 1) = 2.0 * u * v;
    return c;
}

const PairOptions kIdeal{false, false};

GaussianState averaged_steady(double nu, const ContinuumParams& p, const PairOptions& o) {
    return lyapunov_steady(averaged(pair_model(pair_parameters(nu, p, DriveConfig::D), o),
                                    pair_model(pair_parameters(nu, p, DriveConfig::Dbar), o)));
}

}  // namespace

TEST(Coupling, OhmicLaw) {
    EXPECT_NEAR(coupling(3.0, 6e-4, 0.01), 6.0e-3, 1e-15);
    EXPECT_NEAR(coupling(8.0, 6e-4, 0.01) / coupling(2.0, 6e-4, 0.01), 2.0, 1e-15);
    EXPECT_LT(coupling(1e-12, 6e-4, 0.01), 1e-8);
    EXPECT_THROW(coupling(0.0, 6e-4, 0.01), Error);
    EXPECT_THROW(coupling(-1.0, 6e-4, 0.01), Error);
}

TEST(Coupling, QubitDecay) {
    EXPECT_NEAR(qubit_decay(6e-4, 15.0), 0.0565487, 1e-7);
    EXPECT_EQ(qubit_decay(0.0, 15.0), 0.0);
    EXPECT_NEAR(qubit_decay(1.2e-3, 15.0), 2.0 * qubit_decay(6e-4, 15.0), 1e-16);
}

TEST(PairParameters, CenterOfBand) {
    const ContinuumParams p;
    const PairModel d = pair_parameters(0.0, p, DriveConfig::D);
    EXPECT_NEAR(d.pair.u, std::sqrt(5.0), 1e-13);
    EXPECT_NEAR(d.pair.v, 2.0, 1e-13);
    EXPECT_NEAR(d.pair.gbar * d.pair.gbar, 2 * p.alpha * p.delta_omega * 0.04 * (3.0 - 2.4), 1e-18);
    EXPECT_NEAR(d.gamma_sq.real(), d.pair.gbar * d.pair.gbar / qubit_decay(p.alpha, p.epsilon), 1e-18);
    EXPECT_EQ(d.gamma_sq.imag(), 0.0);
    EXPECT_NEAR(d.kappa, 0.01 / 1e5, 1e-20);
}

TEST(PairParameters, ReversedFrequenciesAreRejected) {
    ContinuumParams p;
    std::swap(p.omega_a, p.omega_b);
    try {
        pair_parameters(0.0, p, DriveConfig::D);
        FAIL() << "expected imaginary_gbar";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "imaginary_gbar");
    }
}

TEST(PairParameters, BarDriveReproducesPairAtCenter) {
    ContinuumParams p;
    p.bar = BarCoupling::drive;
    const PairModel d = pair_parameters(0.0, p, DriveConfig::D);
    const PairModel b = pair_parameters(0.0, p, DriveConfig::Dbar);
    EXPECT_NEAR(b.pair.u, d.pair.u, 1e-13);
    EXPECT_NEAR(b.pair.v, d.pair.v, 1e-13);
    EXPECT_NEAR(b.pair.gbar, d.pair.gbar, 1e-15);
}

// [D, D-bar] = u_D v_B - v_D u_B on the untruncated algebra; checked on
// a small Fock space away from the edge.
TEST(PairParameters, PartnersCommuteAtOperatorLevel) {
    const int dim = 6;
    const FockSpace s = FockSpace::pair(dim, dim);
    auto worst_commutator = [&](const PairModel& d, const PairModel& b) {
        const Op od = jump_op(s, {d.c, d.d, 1.0});
        const Op ob = jump_op(s, {b.c, b.d, 1.0});
        const CMatrix c = commutator(od, ob).matrix();
        double w = 0.0;
        for (int i = 0; i < s.dim(); ++i)
            for (int j = 0; j < s.dim(); ++j) {
                const auto li = s.levels(i), lj = s.levels(j);
                if (li[0] >= dim - 1 || li[1] >= dim - 1 || lj[0] >= dim - 1 || lj[1] >= dim - 1)
                    continue;
                w = std::max(w, std::abs(c(i, j)));
            }
        return w;
    };
    ContinuumParams p;
    for (double nu : {-0.25, -0.1, 0.0, 0.15, 0.25})
        EXPECT_LT(worst_commutator(pair_parameters(nu, p, DriveConfig::D),
                                   pair_parameters(nu, p, DriveConfig::Dbar)),
                  1e-12)
            << nu;
    p.bar = BarCoupling::drive;
    EXPECT_LT(worst_commutator(pair_parameters(0.0, p, DriveConfig::D),
                               pair_parameters(0.0, p, DriveConfig::Dbar)),
              1e-12);
    // Away from the center the bar-drive operator is not the commuting partner.
    EXPECT_GT(worst_commutator(pair_parameters(0.2, p, DriveConfig::D),
                               pair_parameters(0.2, p, DriveConfig::Dbar)),
              1e-3);
}

TEST(PairParameters, BogoliubovIdentityAcrossBand) {
    for (BarCoupling bar : {BarCoupling::matched, BarCoupling::drive}) {
        ContinuumParams p;
        p.bar = bar;
        for (double nu : p.grid())
            for (DriveConfig c : {DriveConfig::D, DriveConfig::Dbar}) {
                const BogoliubovPair bp = pair_parameters(nu, p, c).pair;
                EXPECT_LE(std::abs(bp.residual()), 1e-12 * bp.u * bp.u);
            }
    }
}

TEST(PairParameters, SqueezingRateLorentzianInNu) {
    const ContinuumParams p;
    const double gq = qubit_decay(p.alpha, p.epsilon);
    double prev = std::numeric_limits<double>::infinity();
    for (double nu : {0.0, 0.01, 0.05, 0.1, 0.25}) {
        const PairModel m = pair_parameters(nu, p, DriveConfig::D);
        const double flat = std::abs(m.gamma_sq) / (m.pair.gbar * m.pair.gbar);
        EXPECT_NEAR(flat, 1.0 / std::hypot(nu, gq), 1e-9);
        EXPECT_LT(flat, prev);
        prev = flat;
        EXPECT_NEAR(std::abs(pair_parameters(-nu, p, DriveConfig::D).gamma_sq) /
                        std::pow(pair_parameters(-nu, p, DriveConfig::D).pair.gbar, 2),
                    flat, 1e-9);
    }
}

TEST(PairParameters, CorrectionRates) {
    const ContinuumParams p;
    const PairModel m = pair_parameters(0.0, p, DriveConfig::D);
    const double gq = qubit_decay(p.alpha, p.epsilon);
    ASSERT_EQ(m.corrections.size(), 4u);
    const double ga = coupling(3.0, p.alpha, p.delta_omega);
    const ModeChannel& c0 = m.corrections[0];
    EXPECT_EQ(c0.kind, LadderKind::a);
    EXPECT_NEAR(c0.E, 6.0, 1e-15);
    const double amp2 = 0.04 * ga * ga;
    EXPECT_NEAR(c0.rate.real(), amp2 * gq / (36.0 + gq * gq), 1e-20);
    EXPECT_NEAR(c0.rate.imag(), amp2 * 6.0 / (36.0 + gq * gq), 1e-20);
    EXPECT_NEAR(m.corrections[1].rate.imag(), -c0.rate.imag(), 1e-20);
}

TEST(PairModel, OneSidedCoolingLeavesPartnerHot) {
    const ContinuumParams p;
    const PairModel d = pair_parameters(0.0, p, DriveConfig::D);
    const PairModel b = pair_parameters(0.0, p, DriveConfig::Dbar);
    const DriftDiffusion dd = drift_diffusion(pair_model(d, kIdeal));
    EXPECT_THROW(lyapunov_steady(dd), Error);  // D-bar is conserved
    const GaussianState late =
        evolve_covariance(GaussianState::vacuum(2), dd, 60.0 / d.gamma_sq.real());
    EXPECT_LT(expect_jump_number(late, {d.c, d.d, 1.0}), 1e-10);
    EXPECT_NEAR(expect_jump_number(late, {b.c, b.d, 1.0}), 4.0, 1e-8);
}

TEST(PairModel, AveragedIdealIsTwoModeSqueezedVacuum) {
    const ContinuumParams p;
    const GaussianState s = averaged_steady(0.0, p, kIdeal);
    EXPECT_LT(max_abs(s.cov - two_mode_squeezed_cov(std::sqrt(5.0), 2.0)), 1e-8);
    EXPECT_NEAR(two_mode_quadrature_variance(s), std::pow(std::sqrt(5.0) - 2.0, 2) / 2, 1e-10);
    EXPECT_NEAR(s.symplectic_eigenvalues().maxCoeff(), 1.0, 1e-8);
}

TEST(PairModel, LossOnlyIsVacuum) {
    const ContinuumParams p;
    GaussianModel m(2);
    const PairModel d = pair_parameters(0.0, p, DriveConfig::D);
    for (int k = 0; k < 2; ++k) m.add_jump(unit(2, k), CVector::Zero(2), d.kappa);
    EXPECT_LT(max_abs(lyapunov_steady(m).cov - RMatrix::Identity(4, 4)), 1e-10);
}

TEST(PairModel, DarkStateAcrossBand) {
    const ContinuumParams p;
    for (double nu : p.grid()) {
        const GaussianState s = averaged_steady(nu, p, kIdeal);
        const PairReport r{nu, pair_parameters(nu, p, DriveConfig::D),
                           pair_parameters(nu, p, DriveConfig::Dbar), s};
        const SqueezingReport rep = pair_report(s, r.d_model, r.dbar_model);
        EXPECT_LT(rep.occ_D + *rep.occ_Dbar, 1e-10) << nu;
    }
}

TEST(PairModel, LossDominatedApproachesVacuum) {
    ContinuumParams p;
    p.Q = 1e-4;  // kappa = 100 >> Gamma^sq
    const PairModel d = pair_parameters(0.0, p, DriveConfig::D);
    const GaussianState s = averaged_steady(0.0, p, {true, true});
    EXPECT_LT(occupation(s, 0), 1e-6);
    EXPECT_LT(occupation(s, 1), 1e-6);
    EXPECT_NEAR(expect_jump_number(s, {d.c, d.d, 1.0}), d.pair.v * d.pair.v, 1e-5);
}

TEST(PairModel, QualityFactorImprovesCenterSqueezing) {
    ContinuumParams p;
    double prev_s = -1e9, prev_occ = 1e9;
    for (double q : {1e3, 1e4, 1e5, 1e6}) {
        p.Q = q;
        const SqueezingReport r =
            pair_report(averaged_steady(0.0, p, {true, true}), pair_parameters(0.0, p, DriveConfig::D),
                        pair_parameters(0.0, p, DriveConfig::Dbar));
        EXPECT_GT(r.S_db, prev_s);
        EXPECT_LT(r.occ_D, prev_occ);
        prev_s = r.S_db;
        prev_occ = r.occ_D;
    }
}

TEST(Stroboscopic, ShortCycleMatchesAveraged) {
    ContinuumParams p;
    StroboscopicOptions o;
    const StroboscopicResult r = stroboscopic_steady(0.0, p, o);
    EXPECT_LT(rel_diff(r.fixed_point.cov, r.averaged.cov), 1e-4);
    EXPECT_GT(r.iterations, 1);
}

TEST(Stroboscopic, OrderOfHalfCyclesIsConsistent) {
    ContinuumParams p;
    p.strobe_dt_factor = 0.5;
    const StroboscopicResult r = stroboscopic_steady(0.1, p);
    // Fixed point of (D-bar after D), pushed through one D half-cycle.
    const auto [other, it] = channel_fixed_point(r.half_dbar.after(r.half_d),
                                                 GaussianState::vacuum(2), 1e-12, 1'000'000);
    EXPECT_LT(rel_diff(r.half_d(other).cov, r.fixed_point.cov), 1e-9);
}

TEST(Stroboscopic, LongCycleBreaksDown) {
    ContinuumParams p;
    p.strobe_dt_factor = 10.0;
    const StroboscopicResult r = stroboscopic_steady(0.0, p);
    EXPECT_GT(rel_diff(r.fixed_point.cov, r.averaged.cov), 1e-2);
    const PairModel d = pair_parameters(0.0, p, DriveConfig::D);
    const PairModel b = pair_parameters(0.0, p, DriveConfig::Dbar);
    auto total = [&](const GaussianState& s) {
        return expect_jump_number(s, {d.c, d.d, 1.0}) + expect_jump_number(s, {b.c, b.d, 1.0});
    };
    EXPECT_GT(total(r.fixed_point), total(r.averaged));
}

TEST(Stroboscopic, IdealStaysDark) {
    ContinuumParams p;
    StroboscopicOptions o;
    o.pair = kIdeal;
    o.dt = 0.3 / std::abs(pair_parameters(0.0, p, DriveConfig::D).gamma_sq);
    const StroboscopicResult r = stroboscopic_steady(0.05, p, o);
    const SqueezingReport rep = pair_report(r.fixed_point, pair_parameters(0.05, p, DriveConfig::D),
                                            pair_parameters(0.05, p, DriveConfig::Dbar));
    EXPECT_LT(rep.occ_D + *rep.occ_Dbar, 1e-8);
}

// Two pairs on one Fock space: the joint steady state factorizes.
TEST(PairIndependence, JointSteadyStateFactorizes) {
    ContinuumParams p;
    p.eta2 = 0.08;
    const int dim = 3;
    const PairOptions o{true, true};
    auto pair_terms = [&](double nu) {
        return averaged(pair_model(pair_parameters(nu, p, DriveConfig::D), o),
                        pair_model(pair_parameters(nu, p, DriveConfig::Dbar), o));
    };
    const GaussianModel m1 = pair_terms(0.0), m2 = pair_terms(0.1);
    GaussianModel joint(4);
    auto embed = [](const CVector& v, int offset) {
        CVector out = CVector::Zero(4);
        out.segment(offset, 2) = v;
        return out;
    };
    for (const auto& j : m1.jumps) joint.add_jump(embed(j.c, 0), embed(j.d, 0), j.gamma);
    for (const auto& j : m2.jumps) joint.add_jump(embed(j.c, 2), embed(j.d, 2), j.gamma);

    const DensityMatrix r1 = steady_state(fock_spec(m1, FockSpace::pair(dim, dim)));
    const DensityMatrix r2 = steady_state(fock_spec(m2, FockSpace::pair(dim, dim)));
    const DensityMatrix rj = steady_state(fock_spec(joint, FockSpace({dim, dim, dim, dim})));
    EXPECT_LT((rj.matrix() - kron(r1.matrix(), r2.matrix())).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(BackendEquivalence, CenterPairWithCorrections) {
    ContinuumParams p;
    p.eta2 = 0.1;  // v_0 = 0.5
    p.Q = 1e4;
    const PairModel d = pair_parameters(0.0, p, DriveConfig::D);
    ASSERT_LE(d.pair.v, 1.0);
    const GaussianModel m = averaged(pair_model(d, {true, true}),
                                     pair_model(pair_parameters(0.0, p, DriveConfig::Dbar), {true, true}));
    const GaussianState g = lyapunov_steady(m);
    const FockSpace s = FockSpace::pair(14, 14);
    const DensityMatrix rho = steady_state(fock_spec(m, s));
    ASSERT_LT(max_top_level_population(s, rho.matrix()), kTruncationThreshold);
    EXPECT_LT(rel_diff(moments_from_density(rho).cov, g.cov), 1e-6);
}

TEST(BandSweep, IdealAveragedIsDarkEverywhere) {
    ContinuumParams p;
    BandOptions o;
    o.pair = kIdeal;
    o.dynamics = ContinuumDynamics::averaged;
    const auto pts = band_sweep(p, o);
    ASSERT_EQ(pts.size(), 41u);
    for (const auto& r : pts) {
        EXPECT_EQ(r.status, "ok");
        EXPECT_LT(r.report.occ_D, 1e-10);
    }
    EXPECT_NEAR(pts[20].nu, 0.0, 1e-15);
}

TEST(BandSweep, ParallelMatchesSerial) {
    ContinuumParams p;
    p.n_nu = 9;
    BandOptions o;
    o.dynamics = ContinuumDynamics::averaged;
    const auto a = band_sweep(p, o);
    o.jobs = 3;
    const auto b = band_sweep(p, o);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].report.S_db, b[i].report.S_db);
}

TEST(BandSweep, OmegaRefSensitivityIsSmall) {
    ContinuumParams p;
    BandOptions o;
    o.dynamics = ContinuumDynamics::averaged;
    const auto s = omega_ref_sensitivity(p, 0.0, o);
    ASSERT_EQ(s.size(), 3u);
    // Lower reference frequency: smaller detuning, stronger correction terms.
    EXPECT_LT(s[1].second, s[2].second);
    EXPECT_LT(s[2].second, s[0].second);
    for (const auto& [ref, db] : s) EXPECT_NEAR(db / s[0].second, 1.0, 0.01) << ref;
}

TEST(Validity, ConditionRatiosAreReported) {
    const auto f = continuum_validity(ContinuumParams{}, 0.0);
    auto find = [&](const std::string& n) {
        for (const auto& x : f)
            if (x.name == n) return x;
        ADD_FAILURE() << n;
        return ValidityFlag{};
    };
    EXPECT_FALSE(find("gammaq_over_omega").violated());
    EXPECT_TRUE(find("omega_over_gammaq").violated());
    EXPECT_FALSE(find("omega_over_epsilon").violated());
    EXPECT_FALSE(find("rwa_gsq0_over_delta_omega").violated());
}
