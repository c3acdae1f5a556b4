#include <squeezecool/oracle.hpp>

#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace squeezecool;

namespace {

FullModelParams reference_full(double g, double eta2 = 0.12) {
    SingleModeParams p;
    p.g = g;
    p.eta2 = eta2;
    p.Q = std::numeric_limits<double>::infinity();
    return FullModelParams::from(p);
}

}  // namespace

TEST(LabFrame, StaticHamiltonianMatchesHandBuilt) {
    FullModelParams p = reference_full(1.0);
    p.drives.clear();
    p.fock_dim = 3;
    const LiouvillianSpec spec = lab_frame_generator(p, 0.0);

    CMatrix sz = CMatrix::Zero(2, 2), sx = CMatrix::Zero(2, 2);
    sz(0, 0) = -1.0;
    sz(1, 1) = 1.0;
    sx(0, 1) = sx(1, 0) = 1.0;
    CMatrix a = CMatrix::Zero(3, 3);
    a(0, 1) = 1.0;
    a(1, 2) = std::sqrt(2.0);
    const CMatrix n = a.adjoint() * a;
    const CMatrix i2 = CMatrix::Identity(2, 2), i3 = CMatrix::Identity(3, 3);
    const CMatrix h = 5.0 * kron(sz, i3) + 3.5 * kron(i2, n) + kron(sx, a + a.adjoint());
    EXPECT_LT((spec.hamiltonian.matrix() - h).cwiseAbs().maxCoeff(), 1e-15);
    ASSERT_EQ(spec.terms.size(), 1u);  // kappa = 0
    EXPECT_EQ(spec.terms[0].gamma, cplx(0.2, 0.0));
}

TEST(LabFrame, DriveTermAtZero) {
    const FullModelParams p = reference_full(1.0);
    FullModelParams off = p;
    off.drives.clear();
    const FockSpace s = full_space(p);
    const CMatrix diff =
        lab_frame_generator(p, 0.0).hamiltonian.matrix() - lab_frame_generator(off, 0.0).hamiltonian.matrix();
    const double amp = 0.2 * 6.5 + 0.12 * 13.5;
    EXPECT_LT((diff + amp * qubit_z(s).matrix()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(LabFrame, DriveAveragesToZeroOverCommonPeriod) {
    const FullModelParams p = reference_full(1.0);
    const double period = p.common_period();
    EXPECT_NEAR(period, 4.0 * std::numbers::pi, 1e-12);
    const int n = 20000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += drive_field(p, (k + 0.5) * period / n);
    EXPECT_LT(std::abs(sum / n), 1e-12);
}

TEST(LabFrame, LossTermFollowsQ) {
    FullModelParams p = reference_full(1.0);
    p.base.Q = 1e3;
    const LiouvillianSpec spec = lab_frame_generator(p, 0.0);
    ASSERT_EQ(spec.terms.size(), 2u);
    EXPECT_NEAR(spec.terms[1].gamma.real(), 3.5e-3, 1e-18);
}

TEST(Frames, InteractionPictureMatchesLabFrame) {
    FullModelParams p = reference_full(0.3);
    p.fock_dim = 4;
    p.base.Q = 50.0;
    const FockSpace s = full_space(p);
    std::mt19937_64 rng(3);
    const DensityMatrix rho0(s, testutil::random_density(rng, s.dim()));
    EvolveOptions o;
    o.tol = 1e-11;
    const double t = 3.0;
    const DensityMatrix lab = evolve(rho0, Generator(lab_frame_spec(p)), 0.0, t, o).state;
    const DensityMatrix rot = evolve(rho0, Generator(interaction_frame_spec(p)), 0.0, t, o).state;
    EXPECT_LT((lab_to_interaction(p, lab, t).matrix() - rot.matrix()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FullModel, DecoupledQubitDecays) {
    FullModelParams p = reference_full(0.1);
    p.base.g = 0.0;
    p.fock_dim = 3;
    const FockSpace s = full_space(p);
    EvolveOptions o;
    o.tol = 1e-11;
    const DensityMatrix r =
        evolve(DensityMatrix::basis(s, {1, 0}), Generator(interaction_frame_spec(p)), 0.0, 5.0, o).state;
    const DensityMatrix cav = r.trace_out_qubit();
    EXPECT_NEAR(cav.matrix()(0, 0).real(), 1.0, 1e-12);
    EXPECT_NEAR(r.matrix()(s.index({1, 0}), s.index({1, 0})).real(), std::exp(-0.2 * 5.0), 1e-9);
}

TEST(FullModel, UncoupledTrajectoryStaysVacuum) {
    FullModelParams p = reference_full(0.1);
    p.base.g = 0.0;
    p.fock_dim = 4;
    p.T = 20.0;
    p.stride = 5.0;
    const FullTrajectory tr = simulate_full(p);
    ASSERT_EQ(tr.samples.size(), 5u);
    for (const auto& x : tr.samples) {
        EXPECT_NEAR(x.var_x, 1.0, 1e-12);
        EXPECT_NEAR(x.qubit_excited, 0.0, 1e-12);
    }
}

// Drives off and negligible qubit decay: <n>(t) from exact diagonalization
// of the static lab Hamiltonian.
TEST(FullModel, UndrivenMatchesExactUnitary) {
    FullModelParams p = reference_full(1.0);
    p.drives.clear();
    p.base.gamma_q = 1e-12;
    p.fock_dim = 8;
    p.T = 10.0;
    p.stride = 0.5;
    const FullTrajectory tr = simulate_full(p);
    const FockSpace s = full_space(p);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(lab_frame_generator(p, 0.0).hamiltonian.matrix());
    const CMatrix n = number(s, 0).matrix();
    CVector psi0 = CVector::Zero(s.dim());
    psi0(s.index({0, 0})) = 1.0;
    const CVector c = es.eigenvectors().adjoint() * psi0;
    double worst = 0.0, peak = 0.0;
    for (const auto& x : tr.samples) {
        CVector ph(s.dim());
        for (int k = 0; k < s.dim(); ++k) ph(k) = std::polar(1.0, -es.eigenvalues()(k) * x.t) * c(k);
        const CVector psi = es.eigenvectors() * ph;
        const double exact = psi.dot(n * psi).real();
        worst = std::max(worst, std::abs(x.occupation - exact));
        peak = std::max(peak, exact);
    }
    EXPECT_LT(worst, 1e-7);
    EXPECT_GT(peak, 1e-2);
}

// With qubit decay and no cavity loss, virtual excitations turn into real
// photons and the cavity heats.
TEST(FullModel, QubitDecayHeatsLosslessCavity) {
    FullModelParams p = reference_full(1.0);
    p.drives.clear();
    p.fock_dim = 8;
    p.T = 40.0;
    p.stride = 20.0;
    const FullTrajectory tr = simulate_full(p);
    EXPECT_GT(tr.samples.back().occupation, tr.samples.front().occupation);
}

// Zero-drive control: counter-rotating dressing plus bare qubit decay heats
// the cavity at about gamma_q g^2 / (eps + w0)^2.
TEST(FullModel, ZeroDriveHeatingRate) {
    FullModelParams p = reference_full(0.1);
    p.drives.clear();
    p.fock_dim = 5;
    p.T = 1000.0;
    p.stride = 1000.0;
    const FullTrajectory tr = simulate_full(p);
    const double rate = tr.samples.back().occupation / p.T;
    EXPECT_NEAR(rate / (0.2 * 0.01 / (13.5 * 13.5)), 1.0, 0.05);
}

TEST(FullModel, SamplingSnapsToCommonPeriod) {
    const FullModelParams p = reference_full(0.1);
    const double period = p.common_period();
    const double h = p.stride_for_horizon();
    EXPECT_NEAR(h / period, std::round(h / period), 1e-9);
    EXPECT_GE(p.horizon(), 20.0 / p.gamma_sq());
    EXPECT_NEAR(p.horizon() / h, std::round(p.horizon() / h), 1e-9);
    EXPECT_NEAR(p.gamma_sq(), 2.0 * 0.01 * (0.04 - 0.0144) / 0.2, 1e-15);
}

TEST(FullModel, ShortRunIsPhysical) {
    FullModelParams p = reference_full(0.1);
    p.T = 4.0 * p.common_period();
    p.stride = p.common_period();
    const FullTrajectory tr = simulate_full(p);
    EXPECT_LT(tr.max_trace_error, 1e-8);
    EXPECT_LT(tr.max_hermiticity_error, 1e-8);
    for (const auto& x : tr.samples) {
        EXPECT_GE(x.var_x * x.var_p, 1.0 - 1e-8);
        EXPECT_LE(x.cavity_purity, 1.0 + 1e-12);
        EXPECT_LT(x.qubit_excited, 3.0 * p.gamma_sq() / p.base.gamma_q);
    }
}

TEST(FullModel, StepBoundDoesNotChangeTrajectory) {
    FullModelParams p = reference_full(0.1);
    p.T = 10.0;
    p.stride = 10.0;
    const FullTrajectory a = simulate_full(p);
    p.max_step_factor = 1.0 / 50.0;
    const FullTrajectory b = simulate_full(p);
    EXPECT_LT((a.samples.back().cavity.cov - b.samples.back().cavity.cov).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_GT(b.stats.accepted, a.stats.accepted);
}

TEST(FullModel, QuadratureRotation) {
    GaussianState s{1, RVector::Zero(2), RMatrix::Zero(2, 2)};
    s.cov(0, 0) = 0.25;
    s.cov(1, 1) = 4.0;
    const GaussianState r = rotate_quadratures(s, std::numbers::pi / 2);
    EXPECT_NEAR(r.cov(0, 0), 4.0, 1e-14);
    EXPECT_NEAR(r.cov(1, 1), 0.25, 1e-14);
    EXPECT_NEAR(r.cov(0, 1), 0.0, 1e-14);
}

TEST(Sidebands, NoDriveSinglePeak) {
    FullModelParams p = reference_full(0.7);
    p.drives.clear();
    const CouplingSpectrum s = effective_coupling_check(p);
    ASSERT_EQ(s.lines.size(), 1u);
    EXPECT_NEAR(std::abs(s.lines[0].amplitude - 0.7), 0.0, 1e-12);
    EXPECT_EQ(s.fitted_c, 0.0);
}

TEST(Sidebands, WeakDriveMatchesLinearAmplitude) {
    FullModelParams p = reference_full(1.0);
    p.drives = {{6.5, 0.05}};
    const CouplingSpectrum s = effective_coupling_check(p);
    ASSERT_EQ(s.lines.size(), 3u);
    for (int k : {1, 2}) {
        const SidebandLine& l = s.lines[k];
        EXPECT_NEAR(std::abs(l.amplitude) / 0.05, 1.0, 0.005) << l.frequency;
        EXPECT_NEAR(l.amplitude.real() / l.linear_prediction.real(), std::abs(l.amplitude) / 0.05, 1e-6);
    }
    EXPECT_NEAR(s.lines[1].amplitude.real(), -s.lines[2].amplitude.real(), 1e-9);
}

TEST(Sidebands, StrongDriveDeviationIsSecondOrder) {
    FullModelParams p = reference_full(1.0);
    p.drives = {{6.5, 0.2}};
    const CouplingSpectrum s = effective_coupling_check(p);
    for (const auto& l : s.lines) EXPECT_LE(l.deviation, 0.04) << l.frequency;
    EXPECT_GT(s.fitted_c, 0.0);
    EXPECT_LT(s.fitted_c, 1.0);
    // Carrier and first sideband of exp(-2 i eta sin wt) are Bessel J0(2 eta), J1(2 eta).
    EXPECT_NEAR(s.lines[0].amplitude.real(), std::cyl_bessel_j(0.0, 0.4), 1e-6);
    EXPECT_NEAR(std::abs(s.lines[1].amplitude), std::cyl_bessel_j(1.0, 0.4), 1e-6);
}

TEST(Compare, RejectsUnsettledTrajectory) {
    FullTrajectory tr;
    for (int k = 0; k <= 10; ++k) {
        FullSample s;
        s.t = k;
        s.cavity = GaussianState::vacuum(1);
        s.cavity.cov(0, 0) = 1.0 - 0.05 * k;
        s.var_x = s.cavity.cov(0, 0);
        tr.samples.push_back(s);
    }
    const FullModelParams p = reference_full(0.1);
    try {
        compare_effective(tr, GaussianState::vacuum(1), p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "not_settled");
    }
}

TEST(Compare, ReportsRelativeErrors) {
    FullTrajectory tr;
    for (int k = 0; k <= 10; ++k) {
        FullSample s;
        s.t = k;
        s.cavity = GaussianState::vacuum(1);
        s.cavity.cov(0, 0) = 0.3;
        s.cavity.cov(1, 1) = 4.0;
        s.var_x = 0.3;
        s.var_p = 4.0;
        s.qubit_excited = 0.001 * k;
        tr.samples.push_back(s);
    }
    GaussianState eff = GaussianState::vacuum(1);
    eff.cov(0, 0) = 0.25;
    eff.cov(1, 1) = 4.0;
    const DiscrepancyReport r = compare_effective(tr, eff, reference_full(0.1));
    EXPECT_NEAR(r.rel_var_x, 0.2, 1e-12);
    EXPECT_NEAR(r.rel_var_p, 0.0, 1e-12);
    EXPECT_NEAR(r.max_qubit_excited, 0.01, 1e-15);
    EXPECT_NEAR(r.gsq_over_gammaq, 0.0128, 1e-15);
    EXPECT_NEAR(r.gammaq_over_min_E, 0.2 / 6.5, 1e-15);
}
