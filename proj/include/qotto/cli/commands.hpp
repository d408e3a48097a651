#pragma once

// Experiment subcommands. Each returns the CSV tables it produced; the
// executable in tools/ only parses flags and writes files.

#include "qotto/cli/config.hpp"
#include "qotto/cli/csv.hpp"
#include "qotto/quadrature.hpp"
#include "qotto/qotto.hpp"

#include <string>
#include <utility>
#include <vector>

namespace qotto::cli {

struct RunOptions {
    unsigned workers = 1;
    bool strict = false;
};

/// A sweep point failed while running in strict mode.
class PointFailure : public Error {
public:
    PointFailure(const std::string& what, std::string point) : Error(what), point_(std::move(point)) {}
    const std::string& point() const noexcept { return point_; }

private:
    std::string point_;
};

struct CommandOutput {
    std::vector<std::pair<std::string, csv::Table>> files;
    std::vector<std::string> notes;
};

namespace detail {

inline std::vector<std::string> with_error(std::vector<std::string> header, const RunOptions& opt) {
    if (!opt.strict) header.push_back("error");
    return header;
}

inline void finish_row(std::vector<csv::Cell>& row, const std::string& error, const RunOptions& opt,
                       const std::string& point) {
    if (!error.empty() && opt.strict) throw PointFailure(error, point);
    if (!opt.strict) row.emplace_back(error);
}

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline std::string point_label(const char* name, double v) { return std::string(name) + "=" + csv::format_number(v); }

} // namespace detail

inline CommandOutput single_cycle(const ExperimentConfig& cfg, const RunOptions& opt) {
    csv::Table t(detail::with_error({"variant", "alpha_h", "alpha_c", "omega_h", "omega_c", "stop_time", "p_c", "p_h",
                                     "W1", "W3", "W_off_h", "W_off_c", "Q_h", "Q_c", "W_ext", "eta", "eta_otto",
                                     "tau_h", "tau_c", "power", "hfom", "engine_valid"},
                                    opt));
    CycleConfig c = cfg.cycle;
    if (c.variant == CycleVariant::interrupted_hot) c.cold_bath.alpha = c.weak_alpha;
    if (c.variant == CycleVariant::interrupted_cold) c.hot_bath.alpha = c.weak_alpha;
    c.solver.equilibration.record_trace = false;
    std::vector<csv::Cell> row;
    std::string error;
    try {
        const CycleResult r = run_cycle(c);
        row = {std::string(to_string(r.variant)), r.alpha_h, r.alpha_c, r.omega_h, r.omega_c,
               c.variant == CycleVariant::equilibrating ? detail::nan() : c.stop_time, r.p_c, r.p_h, r.W1, r.W3,
               r.W_off_h, r.W_off_c, r.Q_h, r.Q_c, r.W_ext, r.eta, r.eta_otto, r.tau_h_used, r.tau_c_used, r.power,
               r.hfom, r.engine_valid};
    } catch (const std::exception& e) {
        error = e.what();
        row = {std::string(to_string(c.variant)), c.hot_bath.alpha, c.cold_bath.alpha, c.omega_h, c.omega_c,
               c.stop_time};
        while (row.size() < t.header().size() - (opt.strict ? 0 : 1)) row.emplace_back(detail::nan());
        row.back() = false;
    }
    detail::finish_row(row, error, opt, "single-cycle");
    t.add_row(std::move(row));
    CommandOutput out;
    out.files.emplace_back("single-cycle.csv", std::move(t));
    return out;
}

inline CommandOutput sweep_coupling_command(const ExperimentConfig& cfg, const RunOptions& opt) {
    csv::Table t(detail::with_error(
        {"alpha", "W_ext", "Q_h", "Q_c", "eta", "tau_eq_h", "tau_eq_c", "power", "hfom", "engine_valid"}, opt));
    CycleConfig base = cfg.cycle;
    base.variant = CycleVariant::equilibrating;
    const auto points = sweep_coupling(base, cfg.coupling_alphas, opt.workers);
    for (const auto& p : points) {
        std::vector<csv::Cell> row;
        if (p.result) {
            const auto& r = *p.result;
            row = {p.x, r.W_ext, r.Q_h, r.Q_c, r.eta, r.tau_eq_h, r.tau_eq_c, r.power, r.hfom, r.engine_valid};
        } else {
            const double n = detail::nan();
            row = {p.x, n, n, n, n, n, n, n, n, false};
        }
        detail::finish_row(row, p.error, opt, detail::point_label("alpha", p.x));
        t.add_row(std::move(row));
    }
    CommandOutput out;
    out.files.emplace_back("sweep-coupling.csv", std::move(t));
    return out;
}

namespace detail {

inline const std::vector<std::string>& stop_time_columns() {
    static const std::vector<std::string> cols{"alpha", "tau", "p_h", "p_c", "W_ext", "Q_h", "Q_c", "eta",
                                               "tau_h", "tau_c", "power", "hfom", "engine_valid"};
    return cols;
}

inline std::vector<csv::Cell> stop_time_row(double alpha, const SweepPoint& p) {
    if (!p.result) {
        const double n = nan();
        return {alpha, p.x, n, n, n, n, n, n, n, n, n, n, false};
    }
    const auto& r = *p.result;
    return {alpha, p.x, r.p_h, r.p_c, r.W_ext, r.Q_h, r.Q_c, r.eta, r.tau_h_used, r.tau_c_used,
            r.power, r.hfom, r.engine_valid};
}

inline CycleConfig interrupted_config(const CycleConfig& base, double alpha) {
    CycleConfig c = base;
    if (c.variant == CycleVariant::interrupted_hot) {
        c.hot_bath.alpha = alpha;
        c.cold_bath.alpha = c.weak_alpha;
    } else {
        c.cold_bath.alpha = alpha;
        c.hot_bath.alpha = c.weak_alpha;
    }
    c.solver.equilibration.record_trace = false;
    return c;
}

} // namespace detail

inline CommandOutput sweep_stop_time_command(const ExperimentConfig& cfg, const RunOptions& opt) {
    if (cfg.cycle.variant == CycleVariant::equilibrating)
        throw ConfigError("sweep-stop-time: variant interrupted_hot or interrupted_cold required");
    csv::Table t(detail::with_error(detail::stop_time_columns(), opt));
    for (double alpha : cfg.interrupted_alphas) {
        const CycleConfig c = detail::interrupted_config(cfg.cycle, alpha);
        std::vector<SweepPoint> points;
        try {
            points = sweep_stop_time(c, cfg.stop_times, opt.workers);
        } catch (const std::exception& e) {
            for (double tau : cfg.stop_times) points.push_back(SweepPoint{tau, std::nullopt, e.what()});
        }
        for (const auto& p : points) {
            auto row = detail::stop_time_row(alpha, p);
            detail::finish_row(row, p.error, opt, detail::point_label("alpha", alpha) + "," + detail::point_label("tau", p.x));
            t.add_row(std::move(row));
        }
    }
    CommandOutput out;
    out.files.emplace_back("sweep-stop-time.csv", std::move(t));
    return out;
}

inline CommandOutput sweep_frequency_command(const ExperimentConfig& cfg, const RunOptions& opt) {
    CycleConfig base = cfg.cycle;
    if (base.variant == CycleVariant::equilibrating) base.variant = CycleVariant::interrupted_hot;

    // Weak-coupling equilibrating reference at the configured omega_c.
    csv::Table ref(detail::with_error({"omega_c", "alpha", "W_ext", "eta", "tau_h", "tau_c", "power", "hfom"}, opt));
    {
        CycleConfig rc = cfg.cycle;
        rc.variant = CycleVariant::equilibrating;
        rc.hot_bath.alpha = rc.weak_alpha;
        rc.cold_bath.alpha = rc.weak_alpha;
        rc.solver.equilibration.record_trace = false;
        std::vector<csv::Cell> row;
        std::string error;
        try {
            const auto r = run_equilibrating_cycle(rc);
            row = {rc.omega_c, rc.weak_alpha, r.W_ext, r.eta, r.tau_h_used, r.tau_c_used, r.power, r.hfom};
        } catch (const std::exception& e) {
            error = e.what();
            const double n = detail::nan();
            row = {rc.omega_c, rc.weak_alpha, n, n, n, n, n, n};
        }
        detail::finish_row(row, error, opt, "reference");
        ref.add_row(std::move(row));
    }

    std::vector<std::string> cols = detail::stop_time_columns();
    cols.insert(cols.begin(), "omega_c");
    csv::Table t(detail::with_error(cols, opt));
    for (double wc : cfg.omega_cs) {
        CycleConfig c = detail::interrupted_config(base, cfg.frequency_alpha);
        c.omega_c = wc;
        std::vector<SweepPoint> points;
        try {
            points = sweep_stop_time(c, cfg.stop_times, opt.workers);
        } catch (const std::exception& e) {
            for (double tau : cfg.stop_times) points.push_back(SweepPoint{tau, std::nullopt, e.what()});
        }
        for (const auto& p : points) {
            auto row = detail::stop_time_row(cfg.frequency_alpha, p);
            row.insert(row.begin(), wc);
            detail::finish_row(row, p.error, opt,
                               detail::point_label("omega_c", wc) + "," + detail::point_label("tau", p.x));
            t.add_row(std::move(row));
        }
    }
    CommandOutput out;
    out.files.emplace_back("sweep-frequency.csv", std::move(t));
    out.files.emplace_back("sweep-frequency-reference.csv", std::move(ref));
    return out;
}

inline CommandOutput isochore_trace_command(const ExperimentConfig& cfg, const RunOptions& opt) {
    csv::Table t(detail::with_error({"isochore", "alpha", "method", "t", "p", "p_ss", "interaction_energy"}, opt));
    const auto grid = linear_grid(0.0, cfg.trace.t_end, cfg.trace.samples);

    struct Block {
        std::vector<std::vector<csv::Cell>> rows;
        std::string error;
    };
    const std::size_t n = cfg.trace.alphas.size();
    const auto blocks = parallel_map<Block>(n, opt.workers, [&](std::size_t i) {
        Block b;
        const double alpha = cfg.trace.alphas[i];
        try {
            CycleConfig cc = cfg.cycle;
            cc.hot_bath.alpha = alpha;
            cc.cold_bath.alpha = alpha;
            const Isochore hot = make_isochore(cc, BathLabel::hot, alpha);
            const Isochore cold = make_isochore(cc, BathLabel::cold, alpha);
            const HierarchyState ss_h = steady_state(hot.generator);
            const HierarchyState ss_c = steady_state(cold.generator);
            const Mat2 rho_h = reduced_state(ss_h);
            const Mat2 rho_c = reduced_state(ss_c);
            for (const auto* iso : {&hot, &cold}) {
                const bool is_hot = iso == &hot;
                const char* name = is_hot ? "hot" : "cold";
                const Mat2 start = is_hot ? rho_c : rho_h;
                const double p_ss = excited_population(is_hot ? rho_h : rho_c, iso->system);
                const auto traj = sample_trajectory(product_state(iso->generator, start), iso->generator, grid,
                                                    cc.solver.equilibration.integrator);
                for (const auto& s : traj)
                    b.rows.push_back({std::string(name), alpha, std::string("heom"), s.time,
                                      excited_population(s.rho, iso->system), p_ss, s.interaction_energy});
                if (cfg.trace.brme) {
                    const RedfieldModel model = make_redfield_model(iso->system, iso->expansion.spec,
                                                                    iso->expansion.matsubara_cutoff);
                    const double p_br = excited_population(brme_steady_state(model), iso->system);
                    const auto br = brme_propagate(model, start, grid, cc.solver.equilibration.integrator);
                    for (std::size_t k = 0; k < grid.size(); ++k)
                        b.rows.push_back({std::string(name), alpha, std::string("brme"), grid[k],
                                          excited_population(br[k], iso->system), p_br, detail::nan()});
                }
            }
        } catch (const std::exception& e) {
            b.error = e.what();
        }
        return b;
    });
    for (std::size_t i = 0; i < n; ++i) {
        if (!blocks[i].error.empty()) {
            std::vector<csv::Cell> row{std::string("both"), cfg.trace.alphas[i], std::string("heom"), detail::nan(),
                                       detail::nan(), detail::nan(), detail::nan()};
            detail::finish_row(row, blocks[i].error, opt, detail::point_label("alpha", cfg.trace.alphas[i]));
            t.add_row(std::move(row));
            continue;
        }
        for (auto row : blocks[i].rows) {
            detail::finish_row(row, "", opt, "");
            t.add_row(std::move(row));
        }
    }
    CommandOutput out;
    out.files.emplace_back("isochore-trace.csv", std::move(t));
    return out;
}

inline CommandOutput equilibration_scan_command(const ExperimentConfig& cfg, const RunOptions& opt) {
    csv::Table t(detail::with_error({"alpha", "eps_tol", "tau_eq_h", "tau_eq_c", "W_ext", "W_ext_at_tau"}, opt));
    csv::Table gaps(std::vector<std::string>{"alpha", "eps_tol", "isochore", "t", "gap"});

    struct Item {
        double alpha, eps;
    };
    std::vector<Item> items;
    for (double a : cfg.scan.alphas)
        for (double e : cfg.scan.tolerances) items.push_back({a, e});

    struct Outcome {
        std::optional<CycleResult> result;
        std::vector<std::pair<double, double>> gap_h, gap_c;
        std::string error;
    };
    const auto results = parallel_map<Outcome>(items.size(), opt.workers, [&](std::size_t i) {
        Outcome o;
        try {
            CycleConfig c = cfg.cycle;
            c.variant = CycleVariant::equilibrating;
            c.hot_bath.alpha = items[i].alpha;
            c.cold_bath.alpha = items[i].alpha;
            c.solver.equilibration.eps_tol = items[i].eps;
            c.solver.equilibration.record_trace = false;
            o.result = run_equilibrating_cycle(c);
            if (cfg.scan.gap_traces) {
                c.solver.equilibration.record_trace = true;
                const Isochore hot = make_isochore(c, BathLabel::hot, items[i].alpha);
                const Isochore cold = make_isochore(c, BathLabel::cold, items[i].alpha);
                const Mat2 rho_h = reduced_state(steady_state(hot.generator));
                const Mat2 rho_c = reduced_state(steady_state(cold.generator));
                o.gap_h = equilibration_time(hot.generator, product_state(hot.generator, rho_c), rho_h,
                                             c.solver.equilibration).gap_trace;
                o.gap_c = equilibration_time(cold.generator, product_state(cold.generator, rho_h), rho_c,
                                             c.solver.equilibration).gap_trace;
            }
        } catch (const std::exception& e) {
            o.error = e.what();
        }
        return o;
    });
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& o = results[i];
        std::vector<csv::Cell> row;
        if (o.result)
            row = {items[i].alpha, items[i].eps, o.result->tau_eq_h, o.result->tau_eq_c, o.result->W_ext,
                   o.result->W_ext_at_tau};
        else
            row = {items[i].alpha, items[i].eps, detail::nan(), detail::nan(), detail::nan(), detail::nan()};
        detail::finish_row(row, o.error, opt,
                           detail::point_label("alpha", items[i].alpha) + "," + detail::point_label("eps", items[i].eps));
        t.add_row(std::move(row));
        for (const auto& [tt, g] : o.gap_h) gaps.add_row({items[i].alpha, items[i].eps, std::string("hot"), tt, g});
        for (const auto& [tt, g] : o.gap_c) gaps.add_row({items[i].alpha, items[i].eps, std::string("cold"), tt, g});
    }
    CommandOutput out;
    out.files.emplace_back("equilibration-scan.csv", std::move(t));
    if (cfg.scan.gap_traces) out.files.emplace_back("equilibration-gaps.csv", std::move(gaps));
    return out;
}

/// Expansion versus quadrature on [0, 10 / gamma] for both baths.
inline CommandOutput bath_check_command(const ExperimentConfig& cfg, const RunOptions& opt) {
    csv::Table t(std::vector<std::string>{"bath", "t", "re_expansion", "im_expansion", "re_quadrature", "im_quadrature",
                                          "rel_error"});
    double worst = 0.0;
    for (const BathSpec& spec : {cfg.cycle.hot(), cfg.cycle.cold()}) {
        const int k = spec.label == BathLabel::hot ? cfg.cycle.solver.hot_cutoff : cfg.cycle.solver.cold_cutoff;
        const BathExpansion ex = expand_correlation(spec, k);
        const std::vector<double> grid = linear_grid(0.0, 10.0 / spec.damping(), cfg.bath_check.points);
        const double c0 = std::abs(correlation_quadrature(0.0, spec));
        const auto rows = parallel_map<std::vector<csv::Cell>>(grid.size(), opt.workers, [&](std::size_t i) {
            const cplx e = correlation_function(grid[i], ex);
            const cplx q = correlation_quadrature(grid[i], spec);
            return std::vector<csv::Cell>{std::string(to_string(spec.label)), grid[i], e.real(), e.imag(),
                                          q.real(), q.imag(), c0 > 0.0 ? std::abs(e - q) / c0 : std::abs(e - q)};
        });
        for (const auto& r : rows) {
            worst = std::max(worst, std::get<double>(r.back()));
            t.add_row(r);
        }
    }
    CommandOutput out;
    out.notes.push_back("max relative pointwise error " + csv::format_number(worst));
    if (worst > cfg.bath_check.tolerance) {
        const std::string msg = "bath-check: pointwise error " + csv::format_number(worst) + " exceeds tolerance " +
                                csv::format_number(cfg.bath_check.tolerance);
        if (opt.strict) throw PointFailure(msg, "bath-check");
        out.notes.push_back(msg);
    }
    out.files.emplace_back("bath-check.csv", std::move(t));
    return out;
}

} // namespace qotto::cli
