#pragma once

// Embedded Dormand-Prince 5(4) for linear complex ODEs dy/dt = f(y).
// Step sizes are chosen from a max-norm local error estimate and clipped so
// every requested output time is hit exactly, so no dense output is needed.

#include "qotto/error.hpp"
#include "qotto/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

namespace qotto {

struct IntegratorOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double initial_step = 0.0;  // 0 = automatic
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 50'000'000;

    void validate() const {
        if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidArgument("integrator: tolerances > 0 violated");
        if (!(max_step > 0.0)) throw InvalidArgument("integrator: max_step > 0 violated");
    }
};

struct IntegratorStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
};

template <typename Rhs>
class DormandPrince {
public:
    DormandPrince(Rhs rhs, VecX y0, double t0, IntegratorOptions opt = {})
        : rhs_(std::move(rhs)), y_(std::move(y0)), t_(t0), opt_(opt) {
        opt_.validate();
        const Eigen::Index n = y_.size();
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &ynew_}) v->resize(n);
        rhs_(y_, k1_);
        ++stats_.evaluations;
        h_ = opt_.initial_step > 0.0 ? opt_.initial_step : initial_step();
    }

    double time() const { return t_; }
    const VecX& state() const { return y_; }
    const IntegratorStats& stats() const { return stats_; }
    double step_size() const { return h_; }

    /// Replaces the state (same dimension) at the current time.
    void reset(VecX y, double t) {
        y_ = std::move(y);
        t_ = t;
        rhs_(y_, k1_);
        ++stats_.evaluations;
        err_old_ = 1e-4;
    }

    void advance_to(double t_target) {
        if (t_target < t_) throw InvalidArgument("integrator cannot step backwards in time");
        while (t_ < t_target) {
            const double remaining = t_target - t_;
            if (remaining <= 1e-14 * std::max(1.0, std::abs(t_target))) {
                t_ = t_target;
                break;
            }
            const double h_free = std::min(h_, opt_.max_step);
            const bool clipped = remaining <= h_free;
            const double h = clipped ? remaining : h_free;
            if (stats_.accepted + stats_.rejected >= opt_.max_steps)
                throw IntegrationFailure("integrator step budget exhausted", t_);
            if (!(h > 1e-14 * std::max(1.0, std::abs(t_))))
                throw IntegrationFailure("integrator step size underflow", t_);

            const double err = attempt(h);
            if (!std::isfinite(err)) {
                h_ = 0.25 * h;
                ++stats_.rejected;
                continue;
            }
            if (err <= 1.0) {
                ++stats_.accepted;
                t_ = clipped ? t_target : t_ + h;
                std::swap(y_, ynew_);
                std::swap(k1_, k7_);  // first-same-as-last
                // PI controller (Hairer & Wanner, beta = 0.04).
                double fac = std::pow(err, 0.2 - 0.04 * 0.75) / std::pow(err_old_, 0.04);
                fac = std::clamp(fac / 0.9, 1.0 / 10.0, 5.0);
                const double proposal = h / fac;
                // A step shortened only to land on an output time says nothing
                // about the admissible step; keep the larger one.
                h_ = clipped ? std::max(h_, proposal) : proposal;
                err_old_ = std::max(err, 1e-4);
            } else {
                ++stats_.rejected;
                const double fac = std::clamp(std::pow(err, 0.2) / 0.9, 1.0, 10.0);
                h_ = h / fac;
            }
        }
    }

private:
    double initial_step() {
        const double d0 = y_.cwiseAbs().maxCoeff();
        const double d1 = k1_.cwiseAbs().maxCoeff();
        double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::min(h, opt_.max_step);
    }

    double attempt(double h) {
        static constexpr double a21 = 1.0 / 5.0;
        static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
        static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
        static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                                a54 = -212.0 / 729.0;
        static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                                a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
        static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                                b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
        static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                                e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

        tmp_ = y_ + h * a21 * k1_;
        rhs_(tmp_, k2_);
        tmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
        rhs_(tmp_, k3_);
        tmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        rhs_(tmp_, k4_);
        tmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        rhs_(tmp_, k5_);
        tmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        rhs_(tmp_, k6_);
        ynew_ = y_ + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
        rhs_(ynew_, k7_);
        stats_.evaluations += 6;

        tmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        double err = 0.0;
        for (Eigen::Index i = 0; i < y_.size(); ++i) {
            const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y_(i)), std::abs(ynew_(i)));
            err = std::max(err, std::abs(tmp_(i)) / sc);
        }
        return err;
    }

    Rhs rhs_;
    VecX y_;
    double t_;
    IntegratorOptions opt_;
    IntegratorStats stats_;
    double h_ = 0.0;
    double err_old_ = 1e-4;
    VecX k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_;
};

} // namespace qotto
