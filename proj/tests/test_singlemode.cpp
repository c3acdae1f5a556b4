#include <squeezecool/singlemode.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace squeezecool;

namespace {

SingleModeParams reference_params(double eta2 = 0.12) {
    SingleModeParams p;
    p.eta2 = eta2;
    return p;
}

}  // namespace

TEST(Sideband, SingleDriveHasNoSqueezing) {
    const SidebandDecomposition d = sideband_decomposition(reference_params(0.0));
    EXPECT_NEAR(d.pair.gbar, 0.2, 1e-15);
    EXPECT_DOUBLE_EQ(d.pair.u, 1.0);
    EXPECT_DOUBLE_EQ(d.pair.v, 0.0);
    EXPECT_EQ(d.corrections[3].g_lambda, 0.0);
    EXPECT_EQ(d.corrections[5].g_lambda, 0.0);
}

TEST(Sideband, TwoDrivesGiveBogoliubovPair) {
    const SidebandDecomposition d = sideband_decomposition(reference_params(0.12));
    EXPECT_NEAR(d.pair.gbar, 0.16, 1e-15);
    EXPECT_NEAR(d.pair.u, 1.25, 1e-14);
    EXPECT_NEAR(d.pair.v, 0.75, 1e-14);
    EXPECT_NEAR(d.pair.residual(), 0.0, 1e-14);
}

TEST(Sideband, CorrectionTable) {
    const SidebandDecomposition d = sideband_decomposition(reference_params());
    const double e[7] = {-20, -6.5, -13, 7, -13.5, -27, -7};
    const double g[7] = {-0.16, 1.0, -0.2, 0.12, 1.0, -0.12, 0.2};
    const OpKind k[7] = {OpKind::Ddag, OpKind::a,    OpKind::a,   OpKind::a,
                         OpKind::adag, OpKind::adag, OpKind::adag};
    for (int i = 0; i < 7; ++i) {
        EXPECT_NEAR(d.corrections[i].E_lambda, e[i], 1e-14) << i;
        EXPECT_NEAR(d.corrections[i].g_lambda, g[i], 1e-14) << i;
        EXPECT_EQ(d.corrections[i].op, k[i]) << i;
    }
}

TEST(Sideband, RejectsEtaOrdering) {
    EXPECT_THROW(sideband_decomposition(reference_params(0.2)), Error);
    EXPECT_THROW(sideband_decomposition(reference_params(0.3)), Error);
}

TEST(Sideband, BogoliubovIdentityRandomDrives) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        SingleModeParams p;
        p.eta1 = 0.01 + 0.5 * uni(rng);
        p.eta2 = p.eta1 * 0.999 * uni(rng);
        p.g = 0.01 + 2.0 * uni(rng);
        const BogoliubovPair pair = sideband_decomposition(p).pair;
        EXPECT_LE(std::abs(pair.residual()), 1e-12 * pair.u * pair.u);
    }
}

TEST(Rates, SqueezingRateAndLoss) {
    SingleModeParams p = reference_params(0.0);
    p.Q = 1e5;
    const EffectiveRates r = effective_rates(p, sideband_decomposition(p));
    EXPECT_NEAR(r.gamma_sq.real(), 0.4, 1e-14);
    EXPECT_EQ(r.gamma_sq.imag(), 0.0);
    EXPECT_NEAR(r.kappa, 3.5e-5, 1e-18);
}

TEST(Rates, CorrectionSuppressionRatio) {
    const SingleModeParams p = reference_params();
    const SidebandDecomposition d = sideband_decomposition(p);
    const EffectiveRates r = effective_rates(p, d);
    for (int i = 0; i < 7; ++i) {
        const double gl = d.corrections[i].g_lambda, e = d.corrections[i].E_lambda;
        // Re Gamma^lambda = 2 g^2 gamma / (E^2 + gamma^2) > 0.
        EXPECT_NEAR(r.gamma_lambda[i].real(), 2 * gl * gl * 0.2 / (e * e + 0.04), 1e-15);
        EXPECT_GE(r.gamma_lambda[i].real(), 0.0);
    }
    const double ratio = r.gamma_lambda[3].real() / (2 * 0.12 * 0.12 / 0.2);
    EXPECT_NEAR(ratio, 0.04 / 49.04, 1e-15);
    EXPECT_NEAR(ratio, 8.2e-4, 0.05e-4);
}

// Leading order: -g^2/(eps - w0) - g^2/(eps + w0).
TEST(Rates, CorrectionShiftIsDispersiveShift) {
    const SingleModeParams p = reference_params();
    const double leading = -p.g * p.g * (1.0 / p.omega_d1() + 1.0 / p.omega_d2());
    EXPECT_NEAR(correction_frequency_shift(p) / leading, 1.0, 0.05);
}

TEST(SingleModeModel, IdealSteadyStateIsSqueezedVacuum) {
    SingleModeParams p = reference_params();
    p.fock_dim = 91;
    const SingleModeOptions off{false, false};
    const LiouvillianSpec spec = build_single_mode_liouvillian(p, off);
    EXPECT_EQ(spec.terms.size(), 1u);
    const DensityMatrix rho = steady_state(spec);
    const FockSpace s = spec.space();
    const CVector psi = squeezed_vacuum(s, std::atanh(0.6), SqueezeForm::single_mode);
    EXPECT_GT(rho.fidelity(psi), 1.0 - 1e-8);
    const Op d = bogoliubov_op(s, sideband_decomposition(p).pair);
    EXPECT_LT(rho.expect(d.adjoint() * d).real(), 1e-10);
}

TEST(SingleModeModel, TermCountWithCorrectionsAndLoss) {
    SingleModeParams p = reference_params();
    p.fock_dim = 5;
    EXPECT_EQ(build_single_mode_liouvillian(p).terms.size(), 9u);
    EXPECT_EQ(build_single_mode_liouvillian(p, {true, false}).terms.size(), 8u);
    EXPECT_EQ(build_single_mode_liouvillian(p, {false, true}).terms.size(), 2u);
}

TEST(SingleModeModel, IdealGaussianClosure) {
    for (double ratio : {0.1, 0.3, 0.6, 0.9}) {
        const SingleModeParams p = reference_params(0.2 * ratio);
        const GaussianState s = lyapunov_steady(single_mode_model(p, {false, false}));
        const BogoliubovPair pair = sideband_decomposition(p).pair;
        const double ideal = -10.0 * std::log10(std::pow(pair.u - pair.v, 2));
        EXPECT_NEAR(-10.0 * std::log10(s.var_x(0)), ideal, 1e-9);
        EXPECT_NEAR(s.symplectic_eigenvalues()(0), 1.0, 1e-8);
    }
}

TEST(SingleModeModel, MarginalDriftRejectedAtEqualDrives) {
    SingleModeParams p = reference_params();
    p.eta2 = p.eta1 * (1.0 - 1e-13);
    EXPECT_THROW(lyapunov_steady(single_mode_model(p, {false, false})), Error);
}

TEST(SingleModeModel, CorrectionsMakeStateMixed) {
    const GaussianState s = lyapunov_steady(single_mode_model(reference_params()));
    EXPECT_GT(s.symplectic_eigenvalues()(0), 1.0);
    EXPECT_GE(s.var_x(0) * s.var_p(0), 1.0 - 1e-8);
}

TEST(SingleModeModel, BackendsAgreeWithCorrections) {
    SingleModeParams p = reference_params(0.06);
    p.g = 0.3;
    p.Q = 1e3;
    const GaussianState g = lyapunov_steady(single_mode_model(p));
    const DensityMatrix rho = steady_state(build_single_mode_liouvillian(p));
    ASSERT_LT(max_top_level_population(rho.space(), rho.matrix()), kTruncationThreshold);
    const GaussianState f = moments_from_density(rho);
    EXPECT_LT((f.cov - g.cov).cwiseAbs().maxCoeff() / g.cov.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SingleModeModel, ValidityFlags) {
    const auto flags = single_mode_validity(reference_params());
    ASSERT_EQ(flags.size(), 3u);
    EXPECT_EQ(flags[0].name, "gsq_over_gammaq");
    EXPECT_NEAR(flags[0].ratio, 0.256 / 0.2, 1e-12);
    EXPECT_TRUE(flags[0].violated());
    EXPECT_NEAR(flags[1].ratio, 0.2 / 3.5, 1e-12);
    EXPECT_FALSE(flags[1].violated());
    SingleModeParams weak = reference_params();
    weak.g = 0.1;
    EXPECT_FALSE(any_violated(single_mode_validity(weak)));
}
