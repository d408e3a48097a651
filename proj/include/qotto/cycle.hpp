#pragma once

// Four-stroke quantum Otto cycle on a two-level system:
//   1. compression  omega_c -> omega_h (no bath, populations frozen)
//   2. hot isochore  at omega_h, bath switched on from a product state
//   3. expansion    omega_h -> omega_c
//   4. cold isochore at omega_c
// Switching a bath off costs W_off = -<H_I>. Energies count positive into the
// working medium except W_ext, the net work extracted per cycle.

#include "qotto/bath.hpp"
#include "qotto/hierarchy.hpp"
#include "qotto/observables.hpp"
#include "qotto/parallel.hpp"
#include "qotto/propagation.hpp"
#include "qotto/system.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace qotto {

/// Truncation depth that keeps populations and interaction energies converged
/// to better than 1e-6 under M -> M + 1 along whole isochore trajectories at
/// the default bath parameters. Transients need far deeper hierarchies than the
/// steady state; the hot bath (higher occupation of the resonant mode) more so.
inline int auto_depth(double alpha, BathLabel bath) {
    struct Step {
        double alpha;
        int hot, cold;
    };
    static constexpr Step table[] = {{1e-4, 8, 6}, {1e-3, 12, 8}, {1e-2, 22, 12}, {1e-1, 38, 22}};
    for (const auto& s : table)
        if (alpha <= s.alpha * (1.0 + 1e-9)) return bath == BathLabel::hot ? s.hot : s.cold;
    return bath == BathLabel::hot ? 60 : 36;
}

struct SolverSettings {
    int hot_cutoff = 3;
    int cold_cutoff = 8;
    int depth = 0;  // 0 = auto_depth(alpha, bath)
    TruncationScheme scheme = TruncationScheme::tier_sum;
    int matsubara_tier_cap = 1;
    std::size_t max_ados = 400000;
    EquilibrationOptions equilibration{};

    void validate() const {
        if (hot_cutoff < 0 || cold_cutoff < 0) throw InvalidArgument("solver: matsubara cutoff K >= 0 violated");
        if (depth < 0) throw InvalidArgument("solver: truncation depth M >= 0 violated");
        equilibration.validate();
        equilibration.integrator.validate();
    }

    TruncationSpec truncation(double alpha, BathLabel bath) const {
        TruncationSpec t;
        t.depth = depth > 0 ? depth : auto_depth(alpha, bath);
        t.scheme = scheme;
        t.matsubara_tier_cap = matsubara_tier_cap;
        t.max_ados = max_ados;
        return t;
    }
};

enum class CycleVariant { equilibrating, interrupted_hot, interrupted_cold };

inline const char* to_string(CycleVariant v) {
    switch (v) {
    case CycleVariant::equilibrating: return "equilibrating";
    case CycleVariant::interrupted_hot: return "interrupted_hot";
    case CycleVariant::interrupted_cold: return "interrupted_cold";
    }
    return "?";
}

struct CycleConfig {
    double omega_h = 1.0;
    double omega_c = 0.5;
    BathSpec hot_bath{1e-2, 1.0, 0.05, 0.5, BathLabel::hot};
    BathSpec cold_bath{1e-2, 0.5, 0.05, 2.5, BathLabel::cold};
    /// Each bath peak sits on its stroke frequency (omega0_j = omega_j).
    bool resonant = true;
    CycleVariant variant = CycleVariant::equilibrating;
    /// tau_h or tau_c of the interrupted isochore.
    double stop_time = 0.0;
    double weak_alpha = 1e-4;
    SystemSpec system{};
    SolverSettings solver{};

    void validate() const {
        if (!(omega_c > 0.0)) throw InvalidArgument("cycle: omega_c > 0 violated");
        if (!(omega_c < omega_h)) throw InvalidArgument("cycle: omega_c < omega_h violated");
        hot().validate();
        cold().validate();
        system.with_omega(omega_h).validate();
        solver.validate();
        if (!(weak_alpha >= 0.0)) throw InvalidArgument("cycle: weak_alpha >= 0 violated");
        if (variant == CycleVariant::interrupted_hot && cold_bath.alpha != weak_alpha)
            throw InvalidArgument("cycle: interrupted_hot requires cold_bath.alpha = weak_alpha");
        if (variant == CycleVariant::interrupted_cold && hot_bath.alpha != weak_alpha)
            throw InvalidArgument("cycle: interrupted_cold requires hot_bath.alpha = weak_alpha");
        if (variant != CycleVariant::equilibrating && !(stop_time >= 0.0 && std::isfinite(stop_time)))
            throw InvalidArgument("cycle: stop_time >= 0 violated");
    }

    BathSpec hot() const {
        BathSpec b = hot_bath;
        b.label = BathLabel::hot;
        if (resonant) b.omega0 = omega_h;
        return b;
    }

    BathSpec cold() const {
        BathSpec b = cold_bath;
        b.label = BathLabel::cold;
        if (resonant) b.omega0 = omega_c;
        return b;
    }

    static CycleConfig equilibrating_at(double alpha) {
        CycleConfig c;
        c.hot_bath.alpha = alpha;
        c.cold_bath.alpha = alpha;
        return c;
    }

    static CycleConfig interrupted_hot_at(double alpha_h, double tau_h) {
        CycleConfig c;
        c.variant = CycleVariant::interrupted_hot;
        c.hot_bath.alpha = alpha_h;
        c.cold_bath.alpha = c.weak_alpha;
        c.stop_time = tau_h;
        return c;
    }

    static CycleConfig interrupted_cold_at(double alpha_c, double tau_c) {
        CycleConfig c;
        c.variant = CycleVariant::interrupted_cold;
        c.cold_bath.alpha = alpha_c;
        c.hot_bath.alpha = c.weak_alpha;
        c.stop_time = tau_c;
        return c;
    }
};

struct CycleResult {
    CycleVariant variant = CycleVariant::equilibrating;
    double alpha_h = 0.0, alpha_c = 0.0;
    double omega_h = 1.0, omega_c = 0.5;
    /// Excited populations entering the compression (p_c) and expansion (p_h) strokes.
    double p_c = 0.0, p_h = 0.0;
    double interaction_h = 0.0, interaction_c = 0.0;
    double W1 = 0.0, W3 = 0.0;
    double W_off_h = 0.0, W_off_c = 0.0;
    double Q_h = 0.0, Q_c = 0.0;
    double W_ext = 0.0;
    double eta = std::numeric_limits<double>::quiet_NaN();
    double eta_otto = 0.0;
    double tau_h_used = 0.0, tau_c_used = 0.0;
    double tau_eq_h = std::numeric_limits<double>::quiet_NaN();
    double tau_eq_c = std::numeric_limits<double>::quiet_NaN();
    double power = 0.0;
    double hfom = std::numeric_limits<double>::quiet_NaN();
    bool efficiency_valid = false;
    bool engine_valid = false;
    /// Equilibrating cycle only: W_ext rebuilt from the isochore states at tau_eq.
    double W_ext_at_tau = std::numeric_limits<double>::quiet_NaN();

    /// Net work done on the medium over the cycle.
    double work_in() const { return W1 + W3 + W_off_h + W_off_c; }
    /// Energy balance W_in + Q_h + Q_c of a closed cycle.
    double first_law_residual() const { return work_in() + Q_h + Q_c; }
};

namespace detail {

inline void check_population(double p) {
    if (!(p >= -1e-8 && p <= 1.0 + 1e-8)) throw InvalidArgument("population in [0,1] violated");
}

} // namespace detail

inline double compression_work(double p_start, double omega_c, double omega_h) {
    detail::check_population(p_start);
    return p_start * (omega_h - omega_c);
}

inline double expansion_work(double p_start, double omega_c, double omega_h) {
    detail::check_population(p_start);
    return p_start * (omega_c - omega_h);
}

inline double isochore_heat(double delta_p, double omega, double w_off) { return omega * delta_p - w_off; }

/// eta * P; NaN unless the cycle runs as an engine (Q_h > 0 and W_ext > 0),
/// since eta < 0 and P < 0 would otherwise multiply to a positive figure.
inline double hfom(const CycleResult& r) {
    if (!r.engine_valid) return std::numeric_limits<double>::quiet_NaN();
    return r.eta * r.power;
}

/// Fills every derived field from populations, interaction energies and durations.
inline void assemble_energetics(CycleResult& r) {
    r.W1 = compression_work(r.p_c, r.omega_c, r.omega_h);
    r.W3 = expansion_work(r.p_h, r.omega_c, r.omega_h);
    r.W_off_h = -r.interaction_h;
    r.W_off_c = -r.interaction_c;
    r.Q_h = isochore_heat(r.p_h - r.p_c, r.omega_h, r.W_off_h);
    r.Q_c = isochore_heat(r.p_c - r.p_h, r.omega_c, r.W_off_c);
    r.W_ext = -r.work_in();
    r.eta_otto = 1.0 - r.omega_c / r.omega_h;
    r.efficiency_valid = r.Q_h > 0.0;
    r.eta = r.efficiency_valid ? r.W_ext / r.Q_h : std::numeric_limits<double>::quiet_NaN();
    r.engine_valid = r.efficiency_valid && r.W_ext > 0.0;
    const double duration = r.tau_h_used + r.tau_c_used;
    r.power = duration > 0.0 ? r.W_ext / duration : std::numeric_limits<double>::quiet_NaN();
    r.hfom = hfom(r);
}

/// One isochore: the system at its stroke frequency plus the hierarchy generator.
struct Isochore {
    SystemSpec system;
    BathExpansion expansion;
    HierarchyGenerator generator;

    Isochore(SystemSpec s, BathExpansion ex, const TruncationSpec& tr)
        : system(std::move(s)), expansion(std::move(ex)), generator(build_generator(system, expansion, tr)) {}
};

inline Isochore make_isochore(const CycleConfig& cfg, BathLabel which, double alpha) {
    const bool hot = which == BathLabel::hot;
    BathSpec b = hot ? cfg.hot() : cfg.cold();
    b.alpha = alpha;
    const SystemSpec s = cfg.system.with_omega(hot ? cfg.omega_h : cfg.omega_c);
    return Isochore(s, expand_correlation(b, hot ? cfg.solver.hot_cutoff : cfg.solver.cold_cutoff),
                    cfg.solver.truncation(alpha, which));
}

namespace detail {

// Prefixes errors with the stroke that raised them.
template <typename F>
auto in_stroke(const char* stroke, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const BudgetExhausted& e) {
        throw BudgetExhausted(std::string(stroke) + ": " + e.what(), e.best_tau());
    } catch (const DegenerateSteadyState& e) {
        throw DegenerateSteadyState(std::string(stroke) + ": " + e.what());
    } catch (const BudgetExceeded& e) {
        throw BudgetExceeded(std::string(stroke) + ": " + e.what());
    } catch (const Error& e) {
        throw Error(std::string(stroke) + ": " + e.what());
    }
}

struct Equilibrated {
    HierarchyState steady;
    Mat2 rho;
    double p = 0.0;
    double interaction = 0.0;
};

inline Equilibrated equilibrate(const Isochore& iso) {
    Equilibrated e{steady_state(iso.generator), Mat2::Zero()};
    e.rho = reduced_state(e.steady);
    e.p = excited_population(e.rho, iso.system);
    e.interaction = interaction_energy(e.steady, iso.system);
    return e;
}

} // namespace detail

inline CycleResult run_equilibrating_cycle(const CycleConfig& cfg) {
    cfg.validate();
    if (cfg.variant != CycleVariant::equilibrating) throw InvalidArgument("cycle: variant = equilibrating required");

    const auto hot = detail::in_stroke("hot isochore", [&] { return make_isochore(cfg, BathLabel::hot, cfg.hot_bath.alpha); });
    const auto cold = detail::in_stroke("cold isochore", [&] { return make_isochore(cfg, BathLabel::cold, cfg.cold_bath.alpha); });
    const auto eh = detail::in_stroke("hot isochore", [&] { return detail::equilibrate(hot); });
    const auto ec = detail::in_stroke("cold isochore", [&] { return detail::equilibrate(cold); });

    const auto rep_h = detail::in_stroke("hot isochore", [&] {
        return equilibration_time(hot.generator, product_state(hot.generator, ec.rho), eh.rho, cfg.solver.equilibration);
    });
    const auto rep_c = detail::in_stroke("cold isochore", [&] {
        return equilibration_time(cold.generator, product_state(cold.generator, eh.rho), ec.rho, cfg.solver.equilibration);
    });

    CycleResult r;
    r.variant = cfg.variant;
    r.alpha_h = cfg.hot_bath.alpha;
    r.alpha_c = cfg.cold_bath.alpha;
    r.omega_h = cfg.omega_h;
    r.omega_c = cfg.omega_c;
    r.tau_eq_h = rep_h.tau_eq;
    r.tau_eq_c = rep_c.tau_eq;
    r.tau_h_used = rep_h.tau_eq;
    r.tau_c_used = rep_c.tau_eq;

    CycleResult at_tau = r;
    at_tau.p_c = excited_population(reduced_state(rep_c.state_at_tau), cold.system);
    at_tau.p_h = excited_population(reduced_state(rep_h.state_at_tau), hot.system);
    at_tau.interaction_c = interaction_energy(rep_c.state_at_tau, cold.system);
    at_tau.interaction_h = interaction_energy(rep_h.state_at_tau, hot.system);
    assemble_energetics(at_tau);

    r.p_c = ec.p;
    r.p_h = eh.p;
    r.interaction_c = ec.interaction;
    r.interaction_h = eh.interaction;
    assemble_energetics(r);
    r.W_ext_at_tau = at_tau.W_ext;
    return r;
}

namespace detail {

// Shared state of an interrupted cycle: the weak equilibrating isochore and the
// strong isochore that gets stopped early.
struct InterruptedSetup {
    bool hot_interrupted;
    Isochore strong;
    Isochore weak;
    Equilibrated weak_eq;
};

inline InterruptedSetup interrupted_setup(const CycleConfig& cfg) {
    cfg.validate();
    const bool hot_int = cfg.variant == CycleVariant::interrupted_hot;
    if (!hot_int && cfg.variant != CycleVariant::interrupted_cold)
        throw InvalidArgument("cycle: interrupted variant required");
    const char* strong_name = hot_int ? "hot isochore" : "cold isochore";
    const char* weak_name = hot_int ? "cold isochore" : "hot isochore";
    const BathLabel strong_label = hot_int ? BathLabel::hot : BathLabel::cold;
    const BathLabel weak_label = hot_int ? BathLabel::cold : BathLabel::hot;
    const double strong_alpha = hot_int ? cfg.hot_bath.alpha : cfg.cold_bath.alpha;

    auto strong = in_stroke(strong_name, [&] { return make_isochore(cfg, strong_label, strong_alpha); });
    auto weak = in_stroke(weak_name, [&] { return make_isochore(cfg, weak_label, cfg.weak_alpha); });
    auto weak_eq = in_stroke(weak_name, [&] { return equilibrate(weak); });
    return InterruptedSetup{hot_int, std::move(strong), std::move(weak), std::move(weak_eq)};
}

// Completes the cycle given the strong-isochore state at its stop time.
inline CycleResult finish_interrupted(const CycleConfig& cfg, const InterruptedSetup& setup,
                                      const HierarchyState& strong_at_stop, double stop_time) {
    const Mat2 rho_stop = reduced_state(strong_at_stop);
    const char* weak_name = setup.hot_interrupted ? "cold isochore" : "hot isochore";
    EquilibrationOptions eo = cfg.solver.equilibration;
    eo.record_trace = false;
    const auto rep = in_stroke(weak_name, [&] {
        return equilibration_time(setup.weak.generator, product_state(setup.weak.generator, rho_stop),
                                  setup.weak_eq.rho, eo);
    });

    CycleResult r;
    r.variant = cfg.variant;
    r.alpha_h = cfg.hot_bath.alpha;
    r.alpha_c = cfg.cold_bath.alpha;
    r.omega_h = cfg.omega_h;
    r.omega_c = cfg.omega_c;
    const double p_stop = excited_population(rho_stop, setup.strong.system);
    const double e_stop = interaction_energy(strong_at_stop, setup.strong.system);
    if (setup.hot_interrupted) {
        r.p_c = setup.weak_eq.p;
        r.interaction_c = setup.weak_eq.interaction;
        r.p_h = p_stop;
        r.interaction_h = e_stop;
        r.tau_h_used = stop_time;
        r.tau_c_used = rep.tau_eq;
        r.tau_eq_c = rep.tau_eq;
    } else {
        r.p_h = setup.weak_eq.p;
        r.interaction_h = setup.weak_eq.interaction;
        r.p_c = p_stop;
        r.interaction_c = e_stop;
        r.tau_c_used = stop_time;
        r.tau_h_used = rep.tau_eq;
        r.tau_eq_h = rep.tau_eq;
    }
    assemble_energetics(r);
    return r;
}

} // namespace detail

inline CycleResult run_interrupted_cycle(const CycleConfig& cfg) {
    const auto setup = detail::interrupted_setup(cfg);
    const char* strong_name = setup.hot_interrupted ? "hot isochore" : "cold isochore";
    const auto state = detail::in_stroke(strong_name, [&] {
        HierarchyPropagator prop(setup.strong.generator,
                                 product_state(setup.strong.generator, setup.weak_eq.rho),
                                 cfg.solver.equilibration.integrator);
        prop.advance_to(cfg.stop_time);
        return prop.state();
    });
    return detail::finish_interrupted(cfg, setup, state, cfg.stop_time);
}

inline CycleResult run_interrupted_hot_cycle(const CycleConfig& cfg) {
    if (cfg.variant != CycleVariant::interrupted_hot) throw InvalidArgument("cycle: variant = interrupted_hot required");
    return run_interrupted_cycle(cfg);
}

inline CycleResult run_interrupted_cold_cycle(const CycleConfig& cfg) {
    if (cfg.variant != CycleVariant::interrupted_cold) throw InvalidArgument("cycle: variant = interrupted_cold required");
    return run_interrupted_cycle(cfg);
}

inline CycleResult run_cycle(const CycleConfig& cfg) {
    return cfg.variant == CycleVariant::equilibrating ? run_equilibrating_cycle(cfg) : run_interrupted_cycle(cfg);
}

struct SweepPoint {
    double x = 0.0;
    std::optional<CycleResult> result;
    std::string error;
};

enum class SweepAxis { coupling, stop_time, frequency };

namespace detail {

inline void check_sweep_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw InvalidArgument("sweep: grid non-empty violated");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] >= grid[i - 1])) throw InvalidArgument("sweep: grid sorted violated");
}

template <typename F>
SweepPoint guarded_point(double x, F&& f) {
    SweepPoint p;
    p.x = x;
    try {
        p.result = f();
    } catch (const std::exception& e) {
        p.error = e.what();
    }
    return p;
}

} // namespace detail

/// Equilibrating cycles with both baths at each coupling of the grid.
inline std::vector<SweepPoint> sweep_coupling(const CycleConfig& base, const std::vector<double>& alphas,
                                              unsigned workers = 1) {
    detail::check_sweep_grid(alphas);
    return parallel_map<SweepPoint>(alphas.size(), workers, [&](std::size_t i) {
        return detail::guarded_point(alphas[i], [&] {
            CycleConfig c = base;
            c.variant = CycleVariant::equilibrating;
            c.hot_bath.alpha = alphas[i];
            c.cold_bath.alpha = alphas[i];
            EquilibrationOptions& eo = c.solver.equilibration;
            eo.record_trace = false;
            return run_equilibrating_cycle(c);
        });
    });
}

/// Interrupted cycles at each stop time; the strong isochore is propagated once
/// and sampled on the grid.
inline std::vector<SweepPoint> sweep_stop_time(const CycleConfig& cfg, const std::vector<double>& times,
                                               unsigned workers = 1) {
    detail::check_sweep_grid(times);
    if (times.front() < 0.0) throw InvalidArgument("sweep: stop times >= 0 violated");
    const auto setup = detail::interrupted_setup(cfg);
    const char* strong_name = setup.hot_interrupted ? "hot isochore" : "cold isochore";

    std::vector<std::optional<HierarchyState>> states(times.size());
    std::string failure;
    try {
        HierarchyPropagator prop(setup.strong.generator, product_state(setup.strong.generator, setup.weak_eq.rho),
                                 cfg.solver.equilibration.integrator);
        for (std::size_t i = 0; i < times.size(); ++i) {
            prop.advance_to(times[i]);
            states[i] = prop.state();
        }
    } catch (const std::exception& e) {
        failure = std::string(strong_name) + ": " + e.what();
    }

    return parallel_map<SweepPoint>(times.size(), workers, [&](std::size_t i) {
        if (!states[i]) {
            SweepPoint p;
            p.x = times[i];
            p.error = failure;
            return p;
        }
        return detail::guarded_point(times[i],
                                     [&] { return detail::finish_interrupted(cfg, setup, *states[i], times[i]); });
    });
}

/// One cycle of the configured variant per cold frequency omega_c.
inline std::vector<SweepPoint> sweep_frequency(const CycleConfig& base, const std::vector<double>& omega_cs,
                                               unsigned workers = 1) {
    detail::check_sweep_grid(omega_cs);
    return parallel_map<SweepPoint>(omega_cs.size(), workers, [&](std::size_t i) {
        return detail::guarded_point(omega_cs[i], [&] {
            CycleConfig c = base;
            c.omega_c = omega_cs[i];
            c.solver.equilibration.record_trace = false;
            return run_cycle(c);
        });
    });
}

inline std::vector<SweepPoint> sweep(const CycleConfig& cfg, SweepAxis axis, const std::vector<double>& grid,
                                     unsigned workers = 1) {
    switch (axis) {
    case SweepAxis::coupling: return sweep_coupling(cfg, grid, workers);
    case SweepAxis::stop_time: return sweep_stop_time(cfg, grid, workers);
    case SweepAxis::frequency: return sweep_frequency(cfg, grid, workers);
    }
    throw InvalidArgument("sweep: unknown axis");
}

/// Heat taken up during an isochore of length t_end, from the end-point
/// observables and from integrating the energy flow along the trajectory.
struct HeatRoutes {
    double from_observables = 0.0;
    double from_flow = 0.0;
};

inline HeatRoutes isochore_heat_two_routes(const Isochore& iso, const Mat2& rho0, double t_end, int intervals = 4000,
                                           const IntegratorOptions& opt = {}) {
    if (intervals < 2 || intervals % 2 != 0) throw InvalidArgument("heat routes: even interval count >= 2 required");
    if (!(t_end > 0.0)) throw InvalidArgument("heat routes: t_end > 0 violated");
    const HierarchyState start = product_state(iso.generator, rho0);
    HierarchyPropagator prop(iso.generator, start, opt);
    const double h = t_end / intervals;
    double simpson = energy_rate(iso.generator, start.ados);
    for (int i = 1; i <= intervals; ++i) {
        prop.advance_to(i == intervals ? t_end : i * h);
        const double w = i == intervals ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        simpson += w * energy_rate(iso.generator, prop.vector());
    }
    HeatRoutes out;
    out.from_flow = simpson * h / 3.0;
    const HierarchyState end = prop.state();
    const double dp = excited_population(reduced_state(end), iso.system) - excited_population(rho0, iso.system);
    out.from_observables = isochore_heat(dp, iso.system.omega, -interaction_energy(end, iso.system));
    return out;
}

} // namespace qotto
