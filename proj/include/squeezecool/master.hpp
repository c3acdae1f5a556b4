#pragma once

// Lindblad generators with complex rates, time evolution and steady states.
//
// A term (O, Gamma) contributes
//     (Gamma/2)(O rho O^+ - O^+ O rho) + H.c.
//   = Re(Gamma) (O rho O^+ - {O^+ O, rho}/2) - i (Im(Gamma)/2) [O^+ O, rho],
// i.e. an ordinary dissipator of rate Re(Gamma) plus the Hamiltonian shift
// (Im(Gamma)/2) O^+ O. Everything below uses the second form.

#include <squeezecool/error.hpp>
#include <squeezecool/hilbert.hpp>
#include <squeezecool/ode.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace squeezecool {

using SparseC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using SparseCC = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

inline SparseC to_sparse(const CMatrix& m, double drop = 0.0) {
    SparseC s = m.sparseView(1.0, drop);
    s.makeCompressed();
    return s;
}

struct LindbladTerm {
    Op op;
    cplx gamma;

    LindbladTerm(Op o, cplx g) : op(std::move(o)), gamma(g) {
        require(gamma.real() >= 0.0, "negative_rate",
                "Re(Gamma) < 0 gives non-contractive dynamics");
        require(std::isfinite(gamma.real()) && std::isfinite(gamma.imag()), "rate",
                "non-finite rate");
    }
};

struct LiouvillianSpec {
    Op hamiltonian;
    std::vector<LindbladTerm> terms;

    explicit LiouvillianSpec(const FockSpace& space) : hamiltonian(zero_op(space)) {}
    LiouvillianSpec(Op h, std::vector<LindbladTerm> t) : hamiltonian(std::move(h)), terms(std::move(t)) {
        validate();
    }

    const FockSpace& space() const { return hamiltonian.space(); }

    LiouvillianSpec& add(Op op, cplx gamma) {
        hamiltonian.check_same(op);
        terms.emplace_back(std::move(op), gamma);
        return *this;
    }

    void validate() const {
        const CMatrix& h = hamiltonian.matrix();
        require((h - h.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff()),
                "hamiltonian", "Hamiltonian is not Hermitian");
        for (const auto& t : terms) hamiltonian.check_same(t.op);
    }
};

/// Generator with explicit time dependence:
///   H(t) = H_static + sum_k h_k(t) H_k,   rate_j(t) = r_j(t) Gamma_j.
/// The schedule fills h (complex, one per part) and r (real >= 0, one per
/// term). H(t) must be Hermitian for every t; individual parts need not be.
struct TimeDependentSpec {
    LiouvillianSpec base;
    std::vector<Op> hamiltonian_parts;
    std::function<void(double t, std::span<cplx> h, std::span<double> r)> schedule;

    const FockSpace& space() const { return base.space(); }
};

class DensityMatrix {
public:
    static constexpr double kTraceTol = 1e-10;
    static constexpr double kHermTol = 1e-10;
    static constexpr double kPosTol = 1e-8;

    DensityMatrix(FockSpace space, CMatrix rho) : space_(std::move(space)), rho_(std::move(rho)) {
        require(rho_.rows() == space_.dim() && rho_.cols() == space_.dim(), "op_dim",
                "density matrix dimension does not match the space");
    }

    static DensityMatrix pure(const FockSpace& space, const CVector& psi) {
        return DensityMatrix(space, psi * psi.adjoint() / psi.squaredNorm());
    }

    static DensityMatrix basis(const FockSpace& space, const std::vector<int>& levels) {
        CMatrix r = CMatrix::Zero(space.dim(), space.dim());
        const int i = space.index(levels);
        r(i, i) = 1.0;
        return DensityMatrix(space, std::move(r));
    }

    static DensityMatrix vacuum(const FockSpace& space) {
        return basis(space, std::vector<int>(space.num_factors(), 0));
    }

    const FockSpace& space() const { return space_; }
    const CMatrix& matrix() const { return rho_; }
    int dim() const { return static_cast<int>(rho_.rows()); }

    cplx trace() const { return rho_.trace(); }
    double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho_ + rho_.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
    double purity() const { return (rho_ * rho_).trace().real(); }

    cplx expect(const Op& op) const {
        require(op.space() == space_, "space_mismatch", "observable on a different space");
        return (op.matrix().cwiseProduct(rho_.transpose())).sum();
    }

    /// <psi|rho|psi> for normalized psi.
    double fidelity(const CVector& psi) const { return (psi.adjoint() * rho_ * psi)(0, 0).real(); }

    /// Throws if any density-matrix invariant is violated beyond tolerance.
    void validate(double trace_tol = kTraceTol, double herm_tol = kHermTol,
                  double pos_tol = kPosTol) const {
        require(std::abs(trace() - 1.0) <= trace_tol, "invariant_trace",
                "trace deviates from 1 by " + std::to_string(std::abs(trace() - 1.0)));
        require(hermiticity_error() <= herm_tol, "invariant_hermiticity",
                "rho not Hermitian: " + std::to_string(hermiticity_error()));
        const double lam = min_eigenvalue();
        require(lam >= -pos_tol, "invariant_positivity",
                "negative eigenvalue " + std::to_string(lam));
    }

    /// Reduced state of the modes after tracing out the qubit factor.
    DensityMatrix trace_out_qubit() const {
        require(space_.has_qubit(), "no_qubit", "space has no qubit factor");
        const FockSpace modes(space_.mode_dims(), false);
        const int m = modes.dim();
        CMatrix r = rho_.topLeftCorner(m, m) + rho_.bottomRightCorner(m, m);
        return DensityMatrix(modes, std::move(r));
    }

private:
    FockSpace space_;
    CMatrix rho_;
};

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    const CMatrix d = a.matrix() - b.matrix();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Contribution of a single term, decomposed form. Valid for any square rho.
inline CMatrix apply_term(const LindbladTerm& term, const CMatrix& rho) {
    require(rho.rows() == term.op.dim() && rho.cols() == term.op.dim(), "space_mismatch",
            "rho does not match the jump operator's space");
    const CMatrix& o = term.op.matrix();
    const CMatrix k = o.adjoint() * o;
    const CMatrix kr = k * rho;
    const CMatrix rk = rho * k;
    return term.gamma.real() * (o * rho * o.adjoint() - 0.5 * (kr + rk)) -
           kI * (0.5 * term.gamma.imag()) * (kr - rk);
}

inline CMatrix apply_term(const LindbladTerm& term, const DensityMatrix& rho) {
    require(term.op.space() == rho.space(), "space_mismatch", "rho on a different space");
    return apply_term(term, rho.matrix());
}

/// Compiled generator. Evaluates
///   L(rho) = -Q rho - rho Q^+ + sum_j R_j O_j rho O_j^+,
///   Q = i H + sum_j (Gamma_j / 2) O_j^+ O_j,   R_j = Re(Gamma_j),
/// using sparse operator storage.
class Generator {
public:
    explicit Generator(const LiouvillianSpec& spec) : dim_(spec.space().dim()) {
        spec.validate();
        CMatrix q = kI * spec.hamiltonian.matrix();
        for (const auto& t : spec.terms) {
            const CMatrix& o = t.op.matrix();
            q += 0.5 * t.gamma * (o.adjoint() * o);
            if (t.gamma.real() > 0.0) {
                jumps_.push_back(to_sparse(o));
                jump_rates_.push_back(t.gamma.real());
                jump_term_.push_back(-1);
            }
        }
        q_parts_.push_back(to_sparse(q));
        q_coef_.push_back(1.0);
        q_kind_.push_back(Kind::fixed);
    }

    explicit Generator(const TimeDependentSpec& spec) : dim_(spec.space().dim()), td_(true) {
        spec.base.validate();
        require(static_cast<bool>(spec.schedule), "schedule", "time-dependent spec without schedule");
        schedule_ = spec.schedule;
        q_parts_.push_back(to_sparse(kI * spec.base.hamiltonian.matrix()));
        q_coef_.push_back(1.0);
        q_kind_.push_back(Kind::fixed);
        for (std::size_t k = 0; k < spec.hamiltonian_parts.size(); ++k) {
            spec.base.hamiltonian.check_same(spec.hamiltonian_parts[k]);
            q_parts_.push_back(to_sparse(spec.hamiltonian_parts[k].matrix()));
            q_coef_.push_back(0.0);
            q_kind_.push_back(Kind::hamiltonian);
            q_index_.push_back(static_cast<int>(k));
        }
        n_h_ = spec.hamiltonian_parts.size();
        n_r_ = spec.base.terms.size();
        for (std::size_t j = 0; j < spec.base.terms.size(); ++j) {
            const auto& t = spec.base.terms[j];
            const CMatrix& o = t.op.matrix();
            q_parts_.push_back(to_sparse(o.adjoint() * o));
            q_coef_.push_back(0.5 * t.gamma);
            q_kind_.push_back(Kind::rate);
            gammas_.push_back(t.gamma);
            q_index_.push_back(static_cast<int>(j));
            if (t.gamma.real() > 0.0) {
                jumps_.push_back(to_sparse(o));
                jump_rates_.push_back(t.gamma.real());
                jump_term_.push_back(static_cast<int>(j));
            }
        }
        h_buf_.assign(n_h_, 0.0);
        r_buf_.assign(n_r_, 1.0);
    }

    int dim() const { return dim_; }
    bool time_dependent() const { return td_; }

    /// dρ/dt for Hermitian rho (uses rho Q^+ = (Q rho)^+).
    void apply_hermitian(double t, const CMatrix& rho, CMatrix& out) const {
        update(t);
        // Only the Hermitian part is propagated; -Q A - (Q A)^dagger is not the
        // generator for an anti-Hermitian A and would amplify roundoff.
        h_ = 0.5 * (rho + rho.adjoint());
        x_.setZero(dim_, dim_);
        for (std::size_t k = 0; k < q_parts_.size(); ++k) {
            const cplx c = current_q_coef(k);
            if (c != 0.0) x_.noalias() += c * (q_parts_[k] * h_);
        }
        out = -x_ - x_.adjoint();
        for (std::size_t j = 0; j < jumps_.size(); ++j) {
            const double r = current_jump_rate(j);
            if (r == 0.0) continue;
            y_.noalias() = jumps_[j] * h_;
            z_ = y_.adjoint();
            x_.noalias() = jumps_[j] * z_;
            out += (0.5 * r) * (x_ + x_.adjoint());
        }
    }

    /// dρ/dt for arbitrary square rho.
    CMatrix apply(double t, const CMatrix& rho) const {
        update(t);
        CMatrix out = CMatrix::Zero(dim_, dim_);
        for (std::size_t k = 0; k < q_parts_.size(); ++k) {
            const cplx c = current_q_coef(k);
            if (c == 0.0) continue;
            const CMatrix qd = CMatrix(q_parts_[k]).adjoint();
            out -= c * (q_parts_[k] * rho) + std::conj(c) * (rho * qd);
        }
        for (std::size_t j = 0; j < jumps_.size(); ++j) {
            const double r = current_jump_rate(j);
            const CMatrix od = CMatrix(jumps_[j]).adjoint();
            out += r * (jumps_[j] * rho) * od;
        }
        return out;
    }

    /// Column-stacked superoperator: vec(L(rho)) = L vec(rho). Static only.
    SparseCC superoperator() const {
        require(!td_, "time_dependent", "superoperator needs a static generator");
        const long d = dim_;
        std::vector<Eigen::Triplet<cplx>> trip;
        const SparseC& q = q_parts_.front();
        // -(I ⊗ Q)
        for (long b = 0; b < d; ++b)
            for (int i = 0; i < q.outerSize(); ++i)
                for (SparseC::InnerIterator it(q, i); it; ++it)
                    trip.emplace_back(b * d + i, b * d + it.col(), -it.value());
        // -(conj(Q) ⊗ I)
        for (int i = 0; i < q.outerSize(); ++i)
            for (SparseC::InnerIterator it(q, i); it; ++it)
                for (long a = 0; a < d; ++a)
                    trip.emplace_back(i * d + a, it.col() * d + a, -std::conj(it.value()));
        // R conj(O) ⊗ O
        for (std::size_t j = 0; j < jumps_.size(); ++j) {
            const SparseC& o = jumps_[j];
            for (int i1 = 0; i1 < o.outerSize(); ++i1)
                for (SparseC::InnerIterator it1(o, i1); it1; ++it1)
                    for (int i2 = 0; i2 < o.outerSize(); ++i2)
                        for (SparseC::InnerIterator it2(o, i2); it2; ++it2)
                            trip.emplace_back(i1 * d + i2, it1.col() * d + it2.col(),
                                              jump_rates_[j] * std::conj(it1.value()) * it2.value());
        }
        SparseCC l(d * d, d * d);
        l.setFromTriplets(trip.begin(), trip.end());
        l.makeCompressed();
        return l;
    }

private:
    enum class Kind { fixed, hamiltonian, rate };

    void update(double t) const {
        if (!td_) return;
        schedule_(t, std::span<cplx>(h_buf_), std::span<double>(r_buf_));
    }

    cplx current_q_coef(std::size_t k) const {
        switch (q_kind_[k]) {
            case Kind::fixed: return q_coef_[k];
            case Kind::hamiltonian: return kI * h_buf_[q_index_[k - 1]];
            case Kind::rate: return q_coef_[k] * r_buf_[q_index_[k - 1]];
        }
        return 0.0;
    }

    double current_jump_rate(std::size_t j) const {
        if (jump_term_[j] < 0) return jump_rates_[j];
        return jump_rates_[j] * r_buf_[jump_term_[j]];
    }

    int dim_;
    bool td_ = false;
    std::vector<SparseC> q_parts_;
    std::vector<cplx> q_coef_;
    std::vector<Kind> q_kind_;
    std::vector<int> q_index_;  // for parts after the first: index into h or r
    std::vector<SparseC> jumps_;
    std::vector<double> jump_rates_;
    std::vector<int> jump_term_;
    std::vector<cplx> gammas_;
    std::size_t n_h_ = 0, n_r_ = 0;
    std::function<void(double, std::span<cplx>, std::span<double>)> schedule_;
    mutable std::vector<cplx> h_buf_;
    mutable std::vector<double> r_buf_;
    mutable CMatrix h_, x_, y_, z_;
};

/// Full generator applied to rho (decomposed form, matrix-free).
inline CMatrix apply_liouvillian(const LiouvillianSpec& spec, const CMatrix& rho) {
    return Generator(spec).apply(0.0, rho);
}

/// Column-stacked Liouvillian of a static spec.
inline SparseCC build_liouvillian_matrix(const LiouvillianSpec& spec,
                                         long max_dim_squared = 1'000'000) {
    const long d = spec.space().dim();
    require(d * d <= max_dim_squared, "dimension_cap",
            "Liouvillian dimension d^2 = " + std::to_string(d * d) + " above cap");
    return Generator(spec).superoperator();
}

inline CVector vec(const CMatrix& m) { return Eigen::Map<const CVector>(m.data(), m.size()); }

inline CMatrix unvec(const CVector& v, int d) { return Eigen::Map<const CMatrix>(v.data(), d, d); }

struct EvolveOptions {
    double tol = 1e-9;
    double max_step = std::numeric_limits<double>::infinity();
    /// Applied corrections (re-Hermitization, trace renormalization) and the
    /// along-trajectory invariant checks must stay below this.
    double invariant_tol = 1e-8;
    /// Observer is called at t0 + k * sample_stride (and at t_final).
    double sample_stride = 0.0;
    std::function<void(double, const DensityMatrix&)> observer;
};

struct EvolveResult {
    DensityMatrix state;
    OdeStats stats;
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
};

namespace detail {

inline DensityMatrix finalize_state(const FockSpace& space, const CMatrix& rho, double tol) {
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    const cplx tr = rho.trace();
    require(herm < tol, "invariant_hermiticity",
            "Hermiticity correction " + std::to_string(herm) + " above tolerance");
    require(std::abs(tr - 1.0) < tol, "invariant_trace",
            "trace correction " + std::to_string(std::abs(tr - 1.0)) + " above tolerance");
    CMatrix out = 0.5 * (rho + rho.adjoint());
    out /= out.trace().real();
    DensityMatrix dm(space, std::move(out));
    require(dm.min_eigenvalue() >= -DensityMatrix::kPosTol, "invariant_positivity",
            "state lost positivity: " + std::to_string(dm.min_eigenvalue()));
    return dm;
}

}  // namespace detail

/// Evolves rho0 under the generator from t0 to t_final.
inline EvolveResult evolve(const DensityMatrix& rho0, const Generator& gen, double t0,
                           double t_final, const EvolveOptions& opts = {}) {
    rho0.validate(1e-8, 1e-8, DensityMatrix::kPosTol);
    require(gen.dim() == rho0.dim(), "space_mismatch", "generator and state dimensions differ");
    require(t_final >= t0, "time", "t_final before t0");
    OdeOptions ode;
    ode.rtol = opts.tol;
    ode.atol = opts.tol;
    ode.max_step = opts.max_step;
    auto rhs = [&gen](double t, const CMatrix& y, CMatrix& dy) { gen.apply_hermitian(t, y, dy); };
    DormandPrince<CMatrix, decltype(rhs)> stepper(rhs, rho0.matrix(), t0, ode);

    double max_tr = 0.0, max_herm = 0.0;
    auto check = [&](double t, const CMatrix& y) {
        const double tr = std::abs(y.trace() - 1.0);
        const double herm = (y - y.adjoint()).cwiseAbs().maxCoeff();
        max_tr = std::max(max_tr, tr);
        max_herm = std::max(max_herm, herm);
        if (tr > opts.invariant_tol || herm > opts.invariant_tol)
            throw Error("invariant", "trace/Hermiticity drift at t = " + std::to_string(t));
    };

    const FockSpace& space = rho0.space();
    if (opts.observer && opts.sample_stride > 0.0) {
        opts.observer(t0, rho0);
        long k = 1;
        for (;;) {
            const double ts = std::min(t0 + k * opts.sample_stride, t_final);
            stepper.advance_to(ts, check);
            opts.observer(ts, detail::finalize_state(space, stepper.state(), opts.invariant_tol));
            if (ts >= t_final) break;
            ++k;
        }
    } else {
        stepper.advance_to(t_final, check);
    }
    return {detail::finalize_state(space, stepper.state(), opts.invariant_tol), stepper.stats(),
            max_tr, max_herm};
}

inline DensityMatrix evolve(const DensityMatrix& rho0, const LiouvillianSpec& spec, double t_final,
                            double tol = 1e-9) {
    EvolveOptions o;
    o.tol = tol;
    return evolve(rho0, Generator(spec), 0.0, t_final, o).state;
}

inline DensityMatrix evolve_timedep(const DensityMatrix& rho0, const TimeDependentSpec& spec,
                                    double t_final, double tol = 1e-9,
                                    double max_step = std::numeric_limits<double>::infinity()) {
    EvolveOptions o;
    o.tol = tol;
    o.max_step = max_step;
    return evolve(rho0, Generator(spec), 0.0, t_final, o).state;
}

struct SteadyStateOptions {
    double residual_tol = 1e-10;
    /// Dense eigenvalue uniqueness check is run when d^2 is at most this.
    long dense_check_max = 1024;
    double gap_tol = 1e-8;
};

/// Unique steady state of a static generator. Solves L vec(rho) = 0 with one
/// row replaced by the trace functional; a second solve with a different row
/// replaced must agree, otherwise the steady space is degenerate.
inline DensityMatrix steady_state(const LiouvillianSpec& spec, const SteadyStateOptions& opts = {}) {
    const int d = spec.space().dim();
    const SparseCC l = build_liouvillian_matrix(spec);
    const long n = static_cast<long>(d) * d;

    if (n <= opts.dense_check_max) {
        Eigen::ComplexEigenSolver<CMatrix> es(CMatrix(l), false);
        Eigen::VectorXd mags = es.eigenvalues().cwiseAbs();
        std::sort(mags.data(), mags.data() + mags.size());
        const double scale = std::max(mags(mags.size() - 1), 1e-300);
        require(mags.size() < 2 || mags(1) > opts.gap_tol * scale, "degenerate_steady_state",
                "Liouvillian has more than one zero eigenvalue");
    }

    auto solve_with_row = [&](long row) -> std::optional<CVector> {
        std::vector<Eigen::Triplet<cplx>> trip;
        trip.reserve(l.nonZeros() + d);
        for (int c = 0; c < l.outerSize(); ++c)
            for (SparseCC::InnerIterator it(l, c); it; ++it)
                if (it.row() != row) trip.emplace_back(it.row(), it.col(), it.value());
        for (int i = 0; i < d; ++i) trip.emplace_back(row, static_cast<long>(i) * d + i, 1.0);
        SparseCC a(n, n);
        a.setFromTriplets(trip.begin(), trip.end());
        a.makeCompressed();
        Eigen::SparseLU<SparseCC, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(a);
        lu.factorize(a);
        if (lu.info() != Eigen::Success) return std::nullopt;
        CVector b = CVector::Zero(n);
        b(row) = 1.0;
        CVector x = lu.solve(b);
        if (lu.info() != Eigen::Success || !x.allFinite()) return std::nullopt;
        return x;
    };

    const auto x1 = solve_with_row(0);
    const auto x2 = solve_with_row(n - 1);
    require(x1.has_value() && x2.has_value(), "degenerate_steady_state",
            "trace-constrained Liouvillian is singular");
    require((*x1 - *x2).cwiseAbs().maxCoeff() < 1e-8, "degenerate_steady_state",
            "steady state depends on the replaced row");

    double lscale = 1.0;
    for (int c = 0; c < l.outerSize(); ++c)
        for (SparseCC::InnerIterator it(l, c); it; ++it) lscale = std::max(lscale, std::abs(it.value()));
    const double residual = (l * *x1).cwiseAbs().maxCoeff();
    require(residual < opts.residual_tol * lscale, "steady_state_residual",
            "steady-state residual " + std::to_string(residual));

    CMatrix rho = unvec(*x1, d);
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    require(herm < 1e-8, "invariant_hermiticity", "steady state not Hermitian");
    rho = (0.5 * (rho + rho.adjoint())).eval();
    rho /= rho.trace().real();
    DensityMatrix out(spec.space(), std::move(rho));
    out.validate();
    return out;
}

}  // namespace squeezecool
