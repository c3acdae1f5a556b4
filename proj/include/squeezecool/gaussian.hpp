#pragma once

// Covariance-matrix backend for generators whose jump operators are linear in
// the mode operators and whose Hamiltonian is at most quadratic.
//
// Quadratures x_i = a_i + a_i^dagger, p_i = -i(a_i - a_i^dagger), ordered
// (x_1, p_1, x_2, p_2, ...). [r_i, r_j] = 2i Omega_ij, and the vacuum
// covariance V_ij = <{dr_i, dr_j}>/2 is the identity.

#include <squeezecool/error.hpp>
#include <squeezecool/hilbert.hpp>
#include <squeezecool/master.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace squeezecool {

using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline RMatrix symplectic_form(int n_modes) {
    RMatrix om = RMatrix::Zero(2 * n_modes, 2 * n_modes);
    for (int i = 0; i < n_modes; ++i) {
        om(2 * i, 2 * i + 1) = 1.0;
        om(2 * i + 1, 2 * i) = -1.0;
    }
    return om;
}

struct GaussianState {
    int n_modes = 0;
    RVector mean;
    RMatrix cov;

    static GaussianState vacuum(int n_modes) {
        return {n_modes, RVector::Zero(2 * n_modes), RMatrix::Identity(2 * n_modes, 2 * n_modes)};
    }

    double var_x(int mode) const { return cov(2 * mode, 2 * mode); }
    double var_p(int mode) const { return cov(2 * mode + 1, 2 * mode + 1); }

    /// Smallest eigenvalue of V + i Omega; the uncertainty relation requires
    /// it to be non-negative.
    double uncertainty_margin() const {
        const Eigen::MatrixXcd m = cov.cast<cplx>() + kI * symplectic_form(n_modes).cast<cplx>();
        return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .minCoeff();
    }

    /// Symplectic eigenvalues in ascending order; all equal 1 for a pure state.
    RVector symplectic_eigenvalues() const {
        // Eigenvalues of Omega V come in pairs +-i nu.
        const Eigen::VectorXcd ev = (symplectic_form(n_modes) * cov).eigenvalues();
        std::vector<double> mag(ev.size());
        for (Eigen::Index i = 0; i < ev.size(); ++i) mag[i] = std::abs(ev(i));
        std::sort(mag.begin(), mag.end());
        RVector nu(n_modes);
        for (int i = 0; i < n_modes; ++i) nu(i) = mag[2 * i];
        return nu;
    }

    void validate(double tol = 1e-8) const {
        require(mean.size() == 2 * n_modes && cov.rows() == 2 * n_modes && cov.cols() == 2 * n_modes,
                "gaussian_dim", "mean/covariance size does not match the mode count");
        require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff()),
                "gaussian_symmetry", "covariance is not symmetric");
        require(uncertainty_margin() >= -tol, "uncertainty",
                "covariance violates the uncertainty relation");
    }
};

/// O = sum_i c_i a_i + d_i a_i^dagger with complex rate gamma.
struct LinearJump {
    CVector c;
    CVector d;
    cplx gamma;

    /// Coefficients of O on the quadratures: O = w . r.
    CVector quadrature_weights() const {
        const Eigen::Index m = c.size();
        CVector w(2 * m);
        for (Eigen::Index i = 0; i < m; ++i) {
            w(2 * i) = 0.5 * (c(i) + d(i));
            w(2 * i + 1) = 0.5 * kI * (c(i) - d(i));
        }
        return w;
    }
};

/// A linear model: quadratic Hamiltonian H = r^T G r / 2 plus linear jumps.
struct GaussianModel {
    int n_modes = 0;
    RMatrix hamiltonian;
    std::vector<LinearJump> jumps;

    explicit GaussianModel(int m)
        : n_modes(m), hamiltonian(RMatrix::Zero(2 * m, 2 * m)) {
        require(m >= 1, "gaussian_dim", "need at least one mode");
    }

    GaussianModel& add_jump(CVector c, CVector d, cplx gamma) {
        require(c.size() == n_modes && d.size() == n_modes, "gaussian_dim",
                "jump coefficient vectors do not match the mode count");
        require(gamma.real() >= 0.0, "negative_rate", "Re(Gamma) < 0 gives non-contractive dynamics");
        jumps.push_back({std::move(c), std::move(d), gamma});
        return *this;
    }

    /// Adds omega a^dagger a (up to a constant).
    GaussianModel& add_number(int mode, double omega) {
        hamiltonian(2 * mode, 2 * mode) += 0.5 * omega;
        hamiltonian(2 * mode + 1, 2 * mode + 1) += 0.5 * omega;
        return *this;
    }
};

/// Unit coefficient vector helper: e_i scaled by s.
inline CVector unit(int n, int i, cplx s = 1.0) {
    CVector v = CVector::Zero(n);
    v(i) = s;
    return v;
}

struct DriftDiffusion {
    RMatrix A;
    RMatrix D;
};

inline DriftDiffusion drift_diffusion(const GaussianModel& model) {
    const int n = 2 * model.n_modes;
    const RMatrix om = symplectic_form(model.n_modes);
    require((model.hamiltonian - model.hamiltonian.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
            "hamiltonian", "quadratic form must be symmetric");
    DriftDiffusion dd{2.0 * om * model.hamiltonian, RMatrix::Zero(n, n)};
    for (const auto& j : model.jumps) {
        const CVector w = j.quadrature_weights();
        const Eigen::MatrixXcd ww = w * w.adjoint();
        const CVector al = om.cast<cplx>() * w;
        dd.A += -2.0 * j.gamma.real() * om * ww.imag() + 2.0 * j.gamma.imag() * om * ww.real();
        dd.D += 4.0 * j.gamma.real() * (al * al.adjoint()).real();
    }
    dd.D = (0.5 * (dd.D + dd.D.transpose())).eval();
    return dd;
}

/// Largest real part among the drift eigenvalues.
inline double drift_abscissa(const RMatrix& a) { return a.eigenvalues().real().maxCoeff(); }

inline GaussianState lyapunov_steady(const DriftDiffusion& dd, double stability_margin = 1e-12) {
    const Eigen::Index n = dd.A.rows();
    const double abscissa = drift_abscissa(dd.A);
    require(abscissa < -stability_margin, "unstable_drift",
            "drift has an eigenvalue with Re = " + std::to_string(abscissa) +
                "; no unique steady state");
    // (I (x) A + A (x) I) vec(V) = -vec(D), column-stacked.
    RMatrix k = RMatrix::Zero(n * n, n * n);
    const RMatrix id = RMatrix::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            k.block(i * n, j * n, n, n) += id(i, j) * dd.A;
            k.block(i * n, j * n, n, n) += dd.A(i, j) * id;
        }
    const RVector rhs = -Eigen::Map<const RVector>(dd.D.data(), n * n);
    const RVector x = k.fullPivLu().solve(rhs);
    RMatrix v = Eigen::Map<const RMatrix>(x.data(), n, n);
    v = (0.5 * (v + v.transpose())).eval();
    const double scale = dd.A.cwiseAbs().maxCoeff() * v.cwiseAbs().maxCoeff() + dd.D.cwiseAbs().maxCoeff();
    const double res = (dd.A * v + v * dd.A.transpose() + dd.D).cwiseAbs().maxCoeff();
    require(res <= 1e-10 * scale, "lyapunov_residual",
            "Lyapunov residual " + std::to_string(res / scale) + " too large");
    GaussianState s{static_cast<int>(n / 2), RVector::Zero(n), v};
    s.validate();
    return s;
}

inline GaussianState lyapunov_steady(const GaussianModel& model) {
    return lyapunov_steady(drift_diffusion(model));
}

/// Affine covariance map V -> Phi V Phi^T + Q, mean -> Phi mean.
struct GaussianChannel {
    RMatrix phi;
    RMatrix q;

    GaussianState operator()(const GaussianState& s) const {
        RMatrix v = phi * s.cov * phi.transpose() + q;
        v = (0.5 * (v + v.transpose())).eval();
        return {s.n_modes, phi * s.mean, v};
    }

    /// (this after first)
    GaussianChannel after(const GaussianChannel& first) const {
        return {phi * first.phi, phi * first.q * phi.transpose() + q};
    }
};

/// Finite-time map of the moment equations, with the diffusion integral from
/// the block matrix exponential exp([[-A, D], [0, A^T]] t). Long times are
/// split into 2^k steps with |A| t / 2^k <= 1 and composed by squaring.
inline GaussianChannel covariance_channel(const DriftDiffusion& dd, double t) {
    const Eigen::Index n = dd.A.rows();
    const double norm = dd.A.cwiseAbs().rowwise().sum().maxCoeff() * t;
    int k = 0;
    while (std::ldexp(norm, -k) > 1.0 && k < 60) ++k;
    const double h = std::ldexp(t, -k);
    RMatrix c = RMatrix::Zero(2 * n, 2 * n);
    c.topLeftCorner(n, n) = -dd.A * h;
    c.topRightCorner(n, n) = dd.D * h;
    c.bottomRightCorner(n, n) = dd.A.transpose() * h;
    const RMatrix e = c.exp();
    GaussianChannel ch;
    ch.phi = e.bottomRightCorner(n, n).transpose();
    ch.q = ch.phi * e.topRightCorner(n, n);
    ch.q = (0.5 * (ch.q + ch.q.transpose())).eval();
    for (int i = 0; i < k; ++i) {
        ch = ch.after(ch);
        ch.q = (0.5 * (ch.q + ch.q.transpose())).eval();
    }
    return ch;
}

inline GaussianState evolve_covariance(const GaussianState& s, const DriftDiffusion& dd, double t) {
    require(t >= 0.0, "time", "negative evolution time");
    if (t == 0.0) return s;
    return covariance_channel(dd, t)(s);
}

/// <O^dagger O> for O = w . r (first and second moments).
inline double expect_jump_number(const GaussianState& s, const LinearJump& j) {
    const CVector w = j.quadrature_weights();
    const Eigen::MatrixXcd second =
        s.cov.cast<cplx>() + kI * symplectic_form(s.n_modes).cast<cplx>();
    const cplx m = w.transpose() * s.mean.cast<cplx>();
    return (w.adjoint() * second * w)(0, 0).real() + std::norm(m);
}

/// <a_i^dagger a_i> = (V_xx + V_pp + <x>^2 + <p>^2 - 2) / 4.
inline double occupation(const GaussianState& s, int mode) {
    const double mx = s.mean(2 * mode), mp = s.mean(2 * mode + 1);
    return 0.25 * (s.var_x(mode) + s.var_p(mode) + mx * mx + mp * mp - 2.0);
}

/// Quadrature operators r_k on a Fock space, ordered as the Gaussian backend.
inline std::vector<Op> quadrature_ops(const FockSpace& space) {
    std::vector<Op> r;
    for (int m = 0; m < space.num_modes(); ++m) {
        const Op a = destroy(space, m);
        r.push_back(a + a.adjoint());
        r.push_back(cplx(0.0, -1.0) * (a - a.adjoint()));
    }
    return r;
}

/// First and second moments of a Fock-space density matrix (qubit ignored).
inline GaussianState moments_from_density(const DensityMatrix& rho) {
    const std::vector<Op> r = quadrature_ops(rho.space());
    const int n = static_cast<int>(r.size());
    GaussianState s{n / 2, RVector::Zero(n), RMatrix::Zero(n, n)};
    for (int i = 0; i < n; ++i) s.mean(i) = rho.expect(r[i]).real();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double sym = 0.5 * rho.expect(r[i] * r[j] + r[j] * r[i]).real();
            s.cov(i, j) = s.cov(j, i) = sym - s.mean(i) * s.mean(j);
        }
    return s;
}

/// Fock-space operator of a linear jump.
inline Op jump_op(const FockSpace& space, const LinearJump& j) {
    require(j.c.size() == space.num_modes(), "space_mismatch", "jump and space mode counts differ");
    Op o = zero_op(space);
    for (int m = 0; m < space.num_modes(); ++m) {
        if (j.c(m) != 0.0) o += j.c(m) * destroy(space, m);
        if (j.d(m) != 0.0) o += j.d(m) * create(space, m);
    }
    return o;
}

/// Same model on a truncated Fock space.
inline LiouvillianSpec fock_spec(const GaussianModel& model, const FockSpace& space) {
    require(space.num_modes() == model.n_modes, "space_mismatch", "mode counts differ");
    const std::vector<Op> r = quadrature_ops(space);
    Op h = zero_op(space);
    for (int i = 0; i < 2 * model.n_modes; ++i)
        for (int j = 0; j < 2 * model.n_modes; ++j)
            if (model.hamiltonian(i, j) != 0.0) h += cplx(0.5 * model.hamiltonian(i, j)) * (r[i] * r[j]);
    Op hh(space, 0.5 * (h.matrix() + h.matrix().adjoint()));
    LiouvillianSpec spec(hh, {});
    for (const auto& j : model.jumps) spec.add(jump_op(space, j), j.gamma);
    return spec;
}

/// Decomposes a Fock-space operator as sum_i c_i a_i + d_i a_i^dagger.
/// Throws "nonlinear_jump" when the remainder is not negligible.
inline LinearJump linear_jump(const Op& op, cplx gamma, double tol = 1e-10) {
    const FockSpace& space = op.space();
    const int m = space.num_modes();
    LinearJump j{CVector::Zero(m), CVector::Zero(m), gamma};
    Op fit = zero_op(space);
    for (int i = 0; i < m; ++i) {
        const Op a = destroy(space, i);
        const Op ad = a.adjoint();
        j.c(i) = (a.matrix().adjoint() * op.matrix()).trace() / a.matrix().squaredNorm();
        j.d(i) = (ad.matrix().adjoint() * op.matrix()).trace() / ad.matrix().squaredNorm();
        fit += j.c(i) * a + j.d(i) * ad;
    }
    const double scale = std::max(1.0, op.matrix().cwiseAbs().maxCoeff());
    require((op.matrix() - fit.matrix()).cwiseAbs().maxCoeff() <= tol * scale, "nonlinear_jump",
            "jump operator is not linear in the mode operators");
    return j;
}

}  // namespace squeezecool
