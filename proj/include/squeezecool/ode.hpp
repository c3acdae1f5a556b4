#pragma once

// Dormand-Prince 5(4) with a PI step-size controller, for Eigen dense states.

#include <squeezecool/error.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace squeezecool {

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-9;
    double initial_step = 0.0;  // 0: pick from the RHS scale
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 1e-14;
    long max_steps = 200'000'000;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_calls = 0;
};

/// Stepper that owns its state and carries the step size across calls to
/// `advance_to`, so a trajectory can be sampled without restarting control.
///
/// `Rhs` is callable as rhs(t, y, dydt).
template <class State, class Rhs>
class DormandPrince {
public:
    DormandPrince(Rhs rhs, State y0, double t0, OdeOptions opts = {})
        : rhs_(std::move(rhs)), y_(std::move(y0)), t_(t0), opts_(opts) {
        k1_.resizeLike(y_);
        rhs_(t_, y_, k1_);
        ++stats_.rhs_calls;
        h_ = opts_.initial_step > 0.0 ? opts_.initial_step : guess_step();
    }

    const State& state() const { return y_; }
    double time() const { return t_; }
    const OdeStats& stats() const { return stats_; }

    /// Integrates to exactly `t_end`. `on_step` is invoked after every
    /// accepted step with (t, y).
    template <class OnStep>
    void advance_to(double t_end, OnStep&& on_step) {
        while (t_ < t_end) {
            require(stats_.accepted + stats_.rejected < opts_.max_steps, "ode_steps",
                    "integrator exceeded max_steps");
            double h = std::min({h_, opts_.max_step, t_end - t_});
            const bool last = (h >= t_end - t_);
            const double err = try_step(h);
            if (err <= 1.0) {
                t_ = last ? t_end : t_ + h;
                y_.swap(y_new_);
                k1_.swap(k7_);  // first-same-as-last
                ++stats_.accepted;
                const double fac = err == 0.0
                                       ? kFacMax
                                       : std::clamp(kSafety * std::pow(err, -kAlpha) *
                                                        std::pow(err_prev_, kBeta),
                                                    kFacMin, kFacMax);
                err_prev_ = std::max(err, 1e-4);
                // Do not let a truncated final step shrink the carried step.
                h_ = last && h < h_ ? h_ : h * (rejected_last_ ? std::min(1.0, fac) : fac);
                rejected_last_ = false;
                on_step(t_, y_);
            } else {
                ++stats_.rejected;
                rejected_last_ = true;
                h_ = h * std::max(kFacMin, kSafety * std::pow(err, -kAlpha));
                require(h_ >= opts_.min_step, "step_underflow",
                        "step size underflow at t = " + std::to_string(t_));
            }
        }
    }

    void advance_to(double t_end) {
        advance_to(t_end, [](double, const State&) {});
    }

private:
    static constexpr double kSafety = 0.9;
    static constexpr double kFacMin = 0.2;
    static constexpr double kFacMax = 5.0;
    static constexpr double kBeta = 0.04;
    static constexpr double kAlpha = 0.2 - 0.75 * kBeta;

    double guess_step() {
        const double y_scale = y_.cwiseAbs().maxCoeff() * opts_.rtol + opts_.atol;
        const double f_scale = k1_.cwiseAbs().maxCoeff();
        double h = f_scale > 0.0 ? 0.01 * std::pow(y_scale / f_scale, 0.2) : 1e-3;
        if (!std::isfinite(h) || h <= 0.0) h = 1e-3;
        return std::min(h, opts_.max_step);
    }

    double try_step(double h) {
        constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                         a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                         a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                         b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                         e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        tmp_ = y_ + h * a21 * k1_;
        rhs_(t_ + c2 * h, tmp_, k2_);
        tmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
        rhs_(t_ + c3 * h, tmp_, k3_);
        tmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        rhs_(t_ + c4 * h, tmp_, k4_);
        tmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        rhs_(t_ + c5 * h, tmp_, k5_);
        tmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        rhs_(t_ + h, tmp_, k6_);
        y_new_ = y_ + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
        rhs_(t_ + h, y_new_, k7_);
        stats_.rhs_calls += 6;

        tmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        const auto scale =
            (opts_.atol + opts_.rtol * y_.cwiseAbs().cwiseMax(y_new_.cwiseAbs()).array());
        const double err = std::sqrt((tmp_.cwiseAbs().array() / scale).square().mean());
        return std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
    }

    Rhs rhs_;
    State y_;
    State y_new_, tmp_;
    State k1_, k2_, k3_, k4_, k5_, k6_, k7_;
    double t_;
    double h_ = 0.0;
    double err_prev_ = 1.0;
    bool rejected_last_ = false;
    OdeOptions opts_;
    OdeStats stats_;
};

}  // namespace squeezecool
