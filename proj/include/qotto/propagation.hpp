#pragma once

#include "qotto/hierarchy.hpp"
#include "qotto/integrator.hpp"

#include <vector>

namespace qotto {

namespace detail {

struct GeneratorRhs {
    const HierarchyGenerator* gen;
    void operator()(const VecX& x, VecX& y) const { gen->apply(x, y); }
};

inline void check_grid(const std::vector<double>& grid, double t0) {
    double prev = t0;
    for (double t : grid) {
        if (!std::isfinite(t) || t < prev) throw InvalidArgument("time grid must be sorted and start at or after the state time");
        prev = t;
    }
}

} // namespace detail

class HierarchyPropagator {
public:
    HierarchyPropagator(const HierarchyGenerator& gen, const HierarchyState& initial,
                        const IntegratorOptions& opt = {})
        : gen_(&gen), layout_(gen.layout()),
          stepper_(detail::GeneratorRhs{&gen}, check(gen, initial).ados, initial.time, opt) {}

    void advance_to(double t) { stepper_.advance_to(t); }
    double time() const { return stepper_.time(); }
    HierarchyState state() const { return HierarchyState{layout_, stepper_.state(), stepper_.time()}; }
    Mat2 reduced() const { return unvectorize(stepper_.state().head<4>()); }
    const VecX& vector() const { return stepper_.state(); }
    const IntegratorStats& stats() const { return stepper_.stats(); }
    const HierarchyGenerator& generator() const { return *gen_; }

    /// Restarts from a state previously produced on the same generator.
    void reset(const HierarchyState& s) { stepper_.reset(check(*gen_, s).ados, s.time); }

private:
    static const HierarchyState& check(const HierarchyGenerator& gen, const HierarchyState& s) {
        if (s.ados.size() != static_cast<Eigen::Index>(gen.dimension()))
            throw InvalidArgument("state dimension does not match the generator");
        return s;
    }

    const HierarchyGenerator* gen_;
    std::shared_ptr<const AdoLayout> layout_;
    DormandPrince<detail::GeneratorRhs> stepper_;
};

/// Full hierarchy states at each grid time.
inline std::vector<HierarchyState> propagate(const HierarchyState& initial, const HierarchyGenerator& gen,
                                             const std::vector<double>& grid, const IntegratorOptions& opt = {}) {
    detail::check_grid(grid, initial.time);
    HierarchyPropagator prop(gen, initial, opt);
    std::vector<HierarchyState> out;
    out.reserve(grid.size());
    for (double t : grid) {
        prop.advance_to(t);
        out.push_back(prop.state());
    }
    return out;
}

struct TrajectorySample {
    double time;
    Mat2 rho;
    double interaction_energy;
};

inline std::vector<TrajectorySample> sample_trajectory(const HierarchyState& initial, const HierarchyGenerator& gen,
                                                       const std::vector<double>& grid,
                                                       const IntegratorOptions& opt = {}) {
    detail::check_grid(grid, initial.time);
    HierarchyPropagator prop(gen, initial, opt);
    std::vector<TrajectorySample> out;
    out.reserve(grid.size());
    for (double t : grid) {
        prop.advance_to(t);
        const HierarchyState s = prop.state();
        out.push_back({t, reduced_state(s), interaction_energy(s, gen.system())});
    }
    return out;
}

/// d/dt (<H_S> + <H_I>) from the generator action: the energy flowing in from
/// the bath. H_S is time-independent during an isochore.
inline double energy_rate(const HierarchyGenerator& gen, const VecX& x) {
    VecX dx;
    gen.apply(x, dx);
    const HierarchyState ds{gen.layout(), std::move(dx), 0.0};
    const double system_part = (gen.system().hamiltonian() * ds.ado(0)).trace().real();
    double coupling_part = 0.0;
    for (std::size_t off : gen.layout()->tier_one) coupling_part += (gen.system().coupling * ds.ado(off)).trace().real();
    return system_part + coupling_part;
}

} // namespace qotto
