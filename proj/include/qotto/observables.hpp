#pragma once

#include "qotto/hierarchy.hpp"
#include "qotto/propagation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace qotto {

/// <+|rho|+>; may leave [0, 1] by round-off, see clamp_population.
inline double excited_population(const Mat2& rho, const SystemSpec& system) {
    const Vec2 e = system.excited_state();
    return (e.adjoint() * rho * e)(0, 0).real();
}

inline double clamp_population(double p) { return std::clamp(p, 0.0, 1.0); }

inline double thermal_population(double beta, double omega) {
    if (!(beta > 0.0) || !(omega > 0.0)) throw InvalidArgument("thermal_population: beta > 0 and omega > 0 violated");
    const double w = std::exp(-beta * omega);
    return w / (1.0 + w);
}

namespace detail {

inline void check_density_matrix(const Mat2& rho, const char* name) {
    constexpr double tol = 1e-8;
    if (!rho.allFinite()) throw InvalidArgument(std::string(name) + " has non-finite entries");
    if (std::abs(rho.trace() - 1.0) > tol) throw InvalidArgument(std::string(name) + ": unit trace violated");
    if (hermiticity_defect(rho) > tol) throw InvalidArgument(std::string(name) + ": Hermiticity violated");
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (rho + rho.adjoint()));
    if (es.eigenvalues().minCoeff() < -tol) throw InvalidArgument(std::string(name) + ": positivity violated");
}

inline Mat2 psd_sqrt(const Mat2& rho) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (rho + rho.adjoint()));
    const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace detail

/// Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)).
inline double fidelity(const Mat2& rho, const Mat2& sigma) {
    detail::check_density_matrix(rho, "fidelity: rho");
    detail::check_density_matrix(sigma, "fidelity: sigma");
    const Mat2 s = detail::psd_sqrt(rho);
    const Mat2 m = s * sigma * s;
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (m + m.adjoint()));
    const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0);
    return std::min(1.0, ev.cwiseSqrt().sum());
}

inline double trace_distance(const Mat2& a, const Mat2& b) {
    const Mat2 d = a - b;
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (d + d.adjoint()));
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

struct EquilibrationOptions {
    double eps_tol = 1e-8;
    double probe_factor = 2.0;
    /// Lower bound on the probe horizon so a state that starts close to the
    /// steady state is still watched for a while.
    double min_horizon = 10.0;
    double t_max = 2e6;
    double first_sample = 1e-3;
    int samples_per_decade = 400;
    /// Largest spacing of the linear part of the grid; 0 picks pi / (4 omega).
    double max_spacing = 0.0;
    double bisection_rtol = 1e-3;
    bool record_trace = true;
    /// Throw BudgetExhausted instead of returning converged = false.
    bool throw_on_budget = true;
    IntegratorOptions integrator{};

    void validate() const {
        if (!(eps_tol > 0.0 && eps_tol < 1.0)) throw InvalidArgument("equilibration: eps_tol in (0,1) violated");
        if (!(probe_factor >= 1.0)) throw InvalidArgument("equilibration: probe_factor >= 1 violated");
        if (!(t_max > 0.0)) throw InvalidArgument("equilibration: t_max > 0 violated");
        if (samples_per_decade < 1) throw InvalidArgument("equilibration: samples_per_decade >= 1 violated");
    }
};

struct EquilibrationReport {
    double tau_eq = 0.0;
    double tolerance = 0.0;
    std::vector<std::pair<double, double>> gap_trace;
    bool converged = false;
    double horizon = 0.0;
    /// Hierarchy state at tau_eq (the product initial state when tau_eq = 0).
    HierarchyState state_at_tau;
    Mat2 steady_rho;
};

namespace detail {

// Logarithmic from `first` with `per_decade` points per decade until the
// spacing reaches `max_dt`, then linear.
class SampleClock {
public:
    SampleClock(double first, int per_decade, double max_dt)
        : t_(first), ratio_(std::pow(10.0, 1.0 / per_decade)), max_dt_(max_dt) {}

    double current() const { return t_; }
    void next() {
        const double log_dt = t_ * (ratio_ - 1.0);
        t_ = log_dt < max_dt_ ? t_ * ratio_ : t_ + max_dt_;
    }

private:
    double t_;
    double ratio_;
    double max_dt_;
};

} // namespace detail

inline double fidelity_gap(const Mat2& rho, const Mat2& steady) {
    const Mat2 r = 0.5 * (rho + rho.adjoint());
    return 1.0 - fidelity(r / r.trace().real(), steady);
}

/// tau_eq = max{t : 1 - F(rho_S(t), rho_ss) >= eps}, found on a dense grid and
/// refined by bisection; the gap must stay below eps up to probe_factor * tau_eq.
inline EquilibrationReport equilibration_time(const HierarchyGenerator& gen, const HierarchyState& initial,
                                              const Mat2& steady_rho, const EquilibrationOptions& opt = {}) {
    opt.validate();
    EquilibrationReport rep;
    rep.tolerance = opt.eps_tol;
    rep.steady_rho = steady_rho;

    const double max_dt = opt.max_spacing > 0.0
                              ? opt.max_spacing
                              : std::min(0.25, std::numbers::pi / (4.0 * gen.system().omega));

    HierarchyPropagator prop(gen, initial, opt.integrator);
    const double t0 = initial.time;

    double last_above = -1.0;
    std::optional<HierarchyState> above_state;
    double first_below_after = -1.0;

    auto record = [&](double t, double gap) {
        if (opt.record_trace) rep.gap_trace.emplace_back(t - t0, gap);
        if (gap >= opt.eps_tol) {
            last_above = t - t0;
            above_state = prop.state();
            first_below_after = -1.0;
        } else if (first_below_after < 0.0) {
            first_below_after = t - t0;
        }
    };

    record(t0, fidelity_gap(prop.reduced(), steady_rho));

    detail::SampleClock clock(opt.first_sample, opt.samples_per_decade, max_dt);
    bool done = false;
    for (;; clock.next()) {
        const double t = clock.current();
        const double horizon = std::max(opt.probe_factor * std::max(last_above, 0.0), opt.min_horizon);
        if (t > horizon && first_below_after >= 0.0) {
            rep.horizon = horizon;
            done = true;
            break;
        }
        if (t > opt.t_max) break;
        prop.advance_to(t0 + t);
        record(t0 + t, fidelity_gap(prop.reduced(), steady_rho));
    }

    if (last_above < 0.0) {
        rep.tau_eq = 0.0;
        rep.state_at_tau = initial;
        rep.converged = done;
        if (!done && opt.throw_on_budget) throw BudgetExhausted("equilibration time budget exhausted", 0.0);
        return rep;
    }

    // Bisection between the last sample above and the next sample below.
    double lo = last_above;
    double hi = first_below_after;
    HierarchyState lo_state = *above_state;
    if (hi > lo) {
        HierarchyPropagator refine(gen, lo_state, opt.integrator);
        while (hi - lo > opt.bisection_rtol * std::max(lo, 1e-6)) {
            const double mid = 0.5 * (lo + hi);
            refine.reset(lo_state);
            refine.advance_to(t0 + mid);
            if (fidelity_gap(refine.reduced(), steady_rho) >= opt.eps_tol) {
                lo = mid;
                lo_state = refine.state();
            } else {
                hi = mid;
            }
        }
    }
    rep.tau_eq = lo;
    rep.state_at_tau = lo_state;
    rep.converged = done;
    if (!done && opt.throw_on_budget) throw BudgetExhausted("equilibration time budget exhausted", lo);
    return rep;
}

} // namespace qotto
