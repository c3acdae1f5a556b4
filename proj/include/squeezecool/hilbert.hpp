#pragma once

// Truncated Fock-space operators for a few bosonic modes, optionally with a
// qubit factor in front.
//
// Basis ordering: qubit first (|0>, |1>), then modes in ascending index; the
// last factor varies fastest. Within a factor, occupations ascend.

#include <squeezecool/error.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace squeezecool {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

class FockSpace {
public:
    FockSpace() = default;

    explicit FockSpace(std::vector<int> mode_dims, bool has_qubit = false)
        : mode_dims_(std::move(mode_dims)), has_qubit_(has_qubit) {
        for (int d : mode_dims_)
            require(d >= 2, "fock_space", "every mode needs at least 2 Fock levels");
        require(!mode_dims_.empty() || has_qubit_, "fock_space", "empty space");
    }

    static FockSpace single(int dim) { return FockSpace({dim}); }
    static FockSpace pair(int dim_a, int dim_b) { return FockSpace({dim_a, dim_b}); }
    static FockSpace qubit_mode(int dim) { return FockSpace({dim}, true); }

    const std::vector<int>& mode_dims() const { return mode_dims_; }
    bool has_qubit() const { return has_qubit_; }
    int num_modes() const { return static_cast<int>(mode_dims_.size()); }

    int dim() const {
        int d = has_qubit_ ? 2 : 1;
        for (int m : mode_dims_) d *= m;
        return d;
    }

    /// Number of tensor factors, qubit included.
    int num_factors() const { return num_modes() + (has_qubit_ ? 1 : 0); }

    int factor_dim(int factor) const {
        if (has_qubit_) return factor == 0 ? 2 : mode_dims_[factor - 1];
        return mode_dims_[factor];
    }

    int mode_factor(int mode) const { return has_qubit_ ? mode + 1 : mode; }

    /// Flat basis index of a product state. `levels` lists the qubit level
    /// first when the space has a qubit.
    int index(const std::vector<int>& levels) const {
        require(static_cast<int>(levels.size()) == num_factors(), "fock_space",
                "level list does not match factor count");
        int idx = 0;
        for (int f = 0; f < num_factors(); ++f) idx = idx * factor_dim(f) + levels[f];
        return idx;
    }

    /// Inverse of `index`.
    std::vector<int> levels(int idx) const {
        std::vector<int> out(num_factors());
        for (int f = num_factors() - 1; f >= 0; --f) {
            out[f] = idx % factor_dim(f);
            idx /= factor_dim(f);
        }
        return out;
    }

    friend bool operator==(const FockSpace&, const FockSpace&) = default;

private:
    std::vector<int> mode_dims_;
    bool has_qubit_ = false;
};

/// An operator tied to the space it acts on.
class Op {
public:
    Op() = default;
    Op(FockSpace space, CMatrix matrix) : space_(std::move(space)), matrix_(std::move(matrix)) {
        require(matrix_.rows() == space_.dim() && matrix_.cols() == space_.dim(), "op_dim",
                "matrix dimension does not match the space");
    }

    const FockSpace& space() const { return space_; }
    const CMatrix& matrix() const { return matrix_; }
    int dim() const { return static_cast<int>(matrix_.rows()); }

    Op adjoint() const { return Op(space_, matrix_.adjoint()); }

    Op& operator+=(const Op& o) {
        check_same(o);
        matrix_ += o.matrix_;
        return *this;
    }
    Op& operator-=(const Op& o) {
        check_same(o);
        matrix_ -= o.matrix_;
        return *this;
    }
    Op& operator*=(cplx s) {
        matrix_ *= s;
        return *this;
    }

    friend Op operator+(Op a, const Op& b) { return a += b; }
    friend Op operator-(Op a, const Op& b) { return a -= b; }
    friend Op operator*(cplx s, Op a) { return a *= s; }
    friend Op operator*(Op a, cplx s) { return a *= s; }
    friend Op operator*(const Op& a, const Op& b) {
        a.check_same(b);
        return Op(a.space_, a.matrix_ * b.matrix_);
    }

    void check_same(const Op& o) const {
        require(space_ == o.space_, "space_mismatch", "operators live on different spaces");
    }

private:
    FockSpace space_;
    CMatrix matrix_;
};

inline Op commutator(const Op& a, const Op& b) { return a * b - b * a; }

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

namespace detail {

inline CMatrix ladder(int dim) {
    CMatrix a = CMatrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

/// Places `local` on tensor factor `factor`, identity elsewhere.
inline Op embed(const FockSpace& space, int factor, const CMatrix& local) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (int f = 0; f < space.num_factors(); ++f) {
        const int d = space.factor_dim(f);
        out = kron(out, f == factor ? local : CMatrix::Identity(d, d));
    }
    return Op(space, std::move(out));
}

}  // namespace detail

inline Op identity(const FockSpace& space) {
    return Op(space, CMatrix::Identity(space.dim(), space.dim()));
}

inline Op zero_op(const FockSpace& space) {
    return Op(space, CMatrix::Zero(space.dim(), space.dim()));
}

inline Op destroy(const FockSpace& space, int mode) {
    require(mode >= 0 && mode < space.num_modes(), "mode_index",
            "mode index " + std::to_string(mode) + " out of range");
    return detail::embed(space, space.mode_factor(mode), detail::ladder(space.mode_dims()[mode]));
}

inline Op create(const FockSpace& space, int mode) { return destroy(space, mode).adjoint(); }

inline Op number(const FockSpace& space, int mode) {
    const Op a = destroy(space, mode);
    return a.adjoint() * a;
}

/// sigma^- = |0><1| on the qubit factor.
inline Op qubit_lower(const FockSpace& space) {
    require(space.has_qubit(), "no_qubit", "space has no qubit factor");
    CMatrix s = CMatrix::Zero(2, 2);
    s(0, 1) = 1.0;
    return detail::embed(space, 0, s);
}

inline Op qubit_raise(const FockSpace& space) { return qubit_lower(space).adjoint(); }

/// sigma_z = diag(-1, +1): the ground state |0> has sigma_z = -1.
inline Op qubit_z(const FockSpace& space) {
    require(space.has_qubit(), "no_qubit", "space has no qubit factor");
    CMatrix s = CMatrix::Zero(2, 2);
    s(0, 0) = -1.0;
    s(1, 1) = 1.0;
    return detail::embed(space, 0, s);
}

/// Bogoliubov coefficients of D = u a + v b^dagger and the coupling gbar that
/// multiplies it.
struct BogoliubovPair {
    double u = 1.0;
    double v = 0.0;
    double gbar = 0.0;

    static constexpr double kTolerance = 1e-12;

    double residual() const { return u * u - v * v - 1.0; }

    void validate() const {
        require(std::abs(residual()) <= kTolerance * std::max(1.0, u * u), "bogoliubov",
                "u^2 - v^2 != 1 (residual " + std::to_string(residual()) + ")");
    }

    double squeeze_parameter() const { return std::atanh(v / u); }

    static BogoliubovPair from_r(double r, double gbar = 0.0) {
        return {std::cosh(r), std::sinh(r), gbar};
    }
};

/// D = u a_{mode_a} + v a^dagger_{mode_b}. With mode_a == mode_b this is the
/// single-mode form u a + v a^dagger.
inline Op bogoliubov_op(const FockSpace& space, const BogoliubovPair& pair, int mode_a,
                        int mode_b) {
    pair.validate();
    return pair.u * destroy(space, mode_a) + pair.v * create(space, mode_b);
}

inline Op bogoliubov_op(const FockSpace& space, const BogoliubovPair& pair, int mode = 0) {
    return bogoliubov_op(space, pair, mode, mode);
}

enum class SqueezeForm { single_mode, two_mode };

/// Squeezed vacuum annihilated by D = cosh(r) a + sinh(r) a^dagger (single
/// mode, on `mode_a`) or by cosh(r) a + sinh(r) b^dagger and its partner
/// (two mode). A qubit factor, if present, is left in |0>.
///
/// Throws when the analytic amplitude of the first Fock level beyond the
/// truncation exceeds `cutoff_tolerance`.
inline CVector squeezed_vacuum(const FockSpace& space, double r, SqueezeForm form,
                               int mode_a = 0, int mode_b = 1,
                               double cutoff_tolerance = 1e-10) {
    const double t = std::tanh(r);
    const double c0 = 1.0 / std::cosh(r);
    CVector psi = CVector::Zero(space.dim());
    auto levels = std::vector<int>(space.num_factors(), 0);

    if (form == SqueezeForm::single_mode) {
        require(mode_a >= 0 && mode_a < space.num_modes(), "mode_index", "mode out of range");
        const int dim = space.mode_dims()[mode_a];
        // c_{2k+2} = -t sqrt((2k+1)/(2k+2)) c_{2k}
        double c = std::sqrt(c0);
        int n = 0;
        for (; n < dim; n += 2) {
            levels[space.mode_factor(mode_a)] = n;
            psi(space.index(levels)) = c;
            c *= -t * std::sqrt((n + 1.0) / (n + 2.0));
        }
        // `c` now holds the amplitude of the first even level past the cutoff.
        require(std::abs(c) < cutoff_tolerance, "truncation",
                "Fock truncation too small for r = " + std::to_string(r));
    } else {
        require(mode_a != mode_b && mode_a >= 0 && mode_b >= 0 && mode_a < space.num_modes() &&
                    mode_b < space.num_modes(),
                "mode_index", "two-mode squeezing needs two distinct valid modes");
        const int dim = std::min(space.mode_dims()[mode_a], space.mode_dims()[mode_b]);
        double c = c0;
        for (int n = 0; n < dim; ++n) {
            levels[space.mode_factor(mode_a)] = n;
            levels[space.mode_factor(mode_b)] = n;
            psi(space.index(levels)) = c;
            c *= -t;
        }
        require(std::abs(c) < cutoff_tolerance, "truncation",
                "Fock truncation too small for r = " + std::to_string(r));
    }
    psi.normalize();
    return psi;
}

/// Probability weight on the top `levels` Fock levels of `mode` in the state
/// with density matrix `rho`.
inline double top_level_population(const FockSpace& space, const CMatrix& rho, int mode,
                                   int levels = 2) {
    const int dim = space.mode_dims()[mode];
    double p = 0.0;
    for (int i = 0; i < space.dim(); ++i) {
        const int n = space.levels(i)[space.mode_factor(mode)];
        if (n >= dim - levels) p += rho(i, i).real();
    }
    return p;
}

/// Maximum over all modes of `top_level_population`.
inline double max_top_level_population(const FockSpace& space, const CMatrix& rho,
                                       int levels = 2) {
    double p = 0.0;
    for (int m = 0; m < space.num_modes(); ++m)
        p = std::max(p, top_level_population(space, rho, m, levels));
    return p;
}

/// Threshold for the truncation adequacy flag on reported states.
inline constexpr double kTruncationThreshold = 1e-8;

}  // namespace squeezecool
