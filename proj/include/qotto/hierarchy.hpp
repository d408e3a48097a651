#pragma once

// Hierarchical equations of motion for a two-level system coupled to one
// bosonic bath through V (x) X. Each auxiliary density operator (ADO) carries
// a multi-index n over the exponents of the correlation function; the zero
// index is the reduced density matrix. Unscaled ADO convention:
//
//   d/dt rho_n = (L_S - Delta [V,[V,.]] - i sum_k n_k z_k) rho_n
//              + sum_k n_k (-i a_k [V, .] + b_k {V, .}) rho_{n - e_k}
//              - i sum_k [V, rho_{n + e_k}]
//
// with a_k, b_k the amplitudes of the symmetric and antisymmetric parts of
// C(t) sharing the exponent z_k, and Delta the Matsubara terminator.

#include "qotto/bath.hpp"
#include "qotto/error.hpp"
#include "qotto/linalg.hpp"
#include "qotto/system.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace qotto {

struct AdoIndex {
    std::vector<int> indices;

    int tier() const { return std::accumulate(indices.begin(), indices.end(), 0); }
    bool is_zero() const { return tier() == 0; }
    bool operator==(const AdoIndex&) const = default;
};

struct AdoIndexHash {
    std::size_t operator()(const AdoIndex& a) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (int v : a.indices) {
            h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return h;
    }
};

enum class TruncationScheme {
    tier_sum,   // sum_k n_k <= depth
    per_index,  // every n_k <= depth
};

struct TruncationSpec {
    int depth = 6;
    TruncationScheme scheme = TruncationScheme::tier_sum;
    /// Limit on the summed indices of the Matsubara modes; negative = no limit.
    int matsubara_tier_cap = -1;
    std::size_t max_ados = 400000;
};

namespace detail {

// Emits every composition of `remaining` into the modes [pos, n) respecting the
// per-mode caps, in descending lexicographic order.
inline void compositions(std::vector<int>& current, std::size_t pos, int remaining,
                         const std::vector<int>& caps, const std::vector<bool>& group,
                         int group_left, std::size_t max_count, std::vector<AdoIndex>& out) {
    const std::size_t n = current.size();
    if (pos == n) {
        if (remaining == 0) {
            if (out.size() >= max_count)
                throw BudgetExceeded("ADO count exceeds the configured budget of " +
                                     std::to_string(max_count));
            out.push_back(AdoIndex{current});
        }
        return;
    }
    int hi = std::min(remaining, caps[pos]);
    if (group[pos]) hi = std::min(hi, group_left);
    for (int v = hi; v >= 0; --v) {
        current[pos] = v;
        compositions(current, pos + 1, remaining - v, caps, group,
                     group[pos] ? group_left - v : group_left, max_count, out);
    }
    current[pos] = 0;
}

} // namespace detail

/// All multi-indices admitted by a truncation, ordered by tier and then in
/// descending lexicographic order; the zero index comes first.
inline std::vector<AdoIndex> enumerate_ados(std::size_t n_exponents, int depth,
                                            TruncationScheme scheme = TruncationScheme::tier_sum,
                                            const std::vector<bool>& matsubara_modes = {},
                                            int matsubara_tier_cap = -1,
                                            std::size_t max_ados = std::numeric_limits<std::size_t>::max()) {
    if (depth < 0) throw InvalidArgument("truncation depth M >= 0 violated");
    std::vector<bool> group = matsubara_modes;
    group.resize(n_exponents, false);
    const int group_cap = matsubara_tier_cap < 0 ? std::numeric_limits<int>::max() / 2 : matsubara_tier_cap;
    const std::vector<int> caps(n_exponents, depth);
    const int max_tier = scheme == TruncationScheme::tier_sum
                             ? depth
                             : depth * static_cast<int>(n_exponents);

    std::vector<AdoIndex> out;
    std::vector<int> current(n_exponents, 0);
    for (int tier = 0; tier <= max_tier; ++tier)
        detail::compositions(current, 0, tier, caps, group, group_cap, max_ados, out);
    return out;
}

/// One hierarchy direction: all bath exponentials sharing a rate z.
struct HierarchyMode {
    cplx rate;
    cplx commutator_amplitude;      // from C^+
    cplx anticommutator_amplitude;  // from C^-
    bool matsubara = false;
};

struct GeneratorOptions {
    /// Merge symmetric and antisymmetric terms that share a rate into one mode.
    bool merge_equal_rates = true;
};

inline std::vector<HierarchyMode> hierarchy_modes(const BathExpansion& ex, bool merge) {
    std::vector<HierarchyMode> modes;
    auto same_rate = [](cplx a, cplx b) {
        return std::abs(a - b) <= 1e-13 * std::max({1.0, std::abs(a), std::abs(b)});
    };
    for (const auto& t : ex.symmetric) {
        const bool mats = std::abs(t.rate.real()) == 0.0;
        if (merge) {
            auto it = std::find_if(modes.begin(), modes.end(),
                                   [&](const HierarchyMode& m) { return same_rate(m.rate, t.rate); });
            if (it != modes.end()) {
                it->commutator_amplitude += t.amplitude;
                continue;
            }
        }
        modes.push_back({t.rate, t.amplitude, 0.0, mats});
    }
    for (const auto& t : ex.antisymmetric) {
        if (merge) {
            auto it = std::find_if(modes.begin(), modes.end(),
                                   [&](const HierarchyMode& m) { return same_rate(m.rate, t.rate); });
            if (it != modes.end()) {
                it->anticommutator_amplitude += t.amplitude;
                continue;
            }
        }
        modes.push_back({t.rate, 0.0, t.amplitude, false});
    }
    return modes;
}

/// Index bookkeeping shared by a generator and every state built on it.
struct AdoLayout {
    std::vector<AdoIndex> indices;
    std::unordered_map<AdoIndex, std::size_t, AdoIndexHash> offsets;
    std::vector<std::size_t> tier_one;
    int depth = 0;

    std::size_t size() const { return indices.size(); }
    std::size_t dimension() const { return 4 * indices.size(); }

    std::optional<std::size_t> offset_of(const AdoIndex& a) const {
        auto it = offsets.find(a);
        if (it == offsets.end()) return std::nullopt;
        return it->second;
    }
};

class HierarchyGenerator {
public:
    using Sparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

    HierarchyGenerator(std::shared_ptr<const AdoLayout> layout, Sparse matrix, SystemSpec system,
                       BathExpansion expansion, std::vector<HierarchyMode> modes)
        : layout_(std::move(layout)), matrix_(std::move(matrix)), system_(std::move(system)),
          expansion_(std::move(expansion)), modes_(std::move(modes)) {
        for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r) {
            double row = 0.0;
            for (Sparse::InnerIterator it(matrix_, r); it; ++it) row += std::abs(it.value());
            norm_ = std::max(norm_, row);
        }
    }

    const Sparse& matrix() const { return matrix_; }
    const std::shared_ptr<const AdoLayout>& layout() const { return layout_; }
    const SystemSpec& system() const { return system_; }
    const BathExpansion& expansion() const { return expansion_; }
    const std::vector<HierarchyMode>& modes() const { return modes_; }

    std::size_t ado_count() const { return layout_->size(); }
    std::size_t dimension() const { return layout_->dimension(); }
    int depth() const { return layout_->depth; }
    /// Max-row-sum norm.
    double norm() const { return norm_; }

    void apply(const VecX& x, VecX& y) const { y.noalias() = matrix_ * x; }

private:
    std::shared_ptr<const AdoLayout> layout_;
    Sparse matrix_;
    SystemSpec system_;
    BathExpansion expansion_;
    std::vector<HierarchyMode> modes_;
    double norm_ = 0.0;
};

inline HierarchyGenerator build_generator(const SystemSpec& system, const BathExpansion& expansion,
                                          const TruncationSpec& truncation,
                                          const GeneratorOptions& options = {}) {
    system.validate();
    auto modes = hierarchy_modes(expansion, options.merge_equal_rates);

    std::vector<bool> mats(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k) mats[k] = modes[k].matsubara;

    auto layout = std::make_shared<AdoLayout>();
    layout->depth = truncation.depth;
    layout->indices = enumerate_ados(modes.size(), truncation.depth, truncation.scheme, mats,
                                     truncation.matsubara_tier_cap, truncation.max_ados);
    layout->offsets.reserve(layout->indices.size());
    for (std::size_t i = 0; i < layout->indices.size(); ++i) {
        layout->offsets.emplace(layout->indices[i], i);
        if (layout->indices[i].tier() == 1) layout->tier_one.push_back(i);
    }

    const Mat4 liouvillian = -I_unit * commutator_superop(system.hamiltonian());
    const Mat4 v_comm = commutator_superop(system.coupling);
    const Mat4 v_anti = anticommutator_superop(system.coupling);
    const Mat4 base = liouvillian - expansion.terminator * (v_comm * v_comm);
    const Mat4 raise = -I_unit * v_comm;

    std::vector<Mat4> lower(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k)
        lower[k] = -I_unit * modes[k].commutator_amplitude * v_comm +
                   modes[k].anticommutator_amplitude * v_anti;

    using Triplet = Eigen::Triplet<cplx>;
    std::vector<Triplet> triplets;
    const std::size_t n_ado = layout->size();
    triplets.reserve(n_ado * (16 + 8 * modes.size()));

    auto push_block = [&](std::size_t row, std::size_t col, const Mat4& block, cplx scale) {
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                const cplx v = scale * block(a, b);
                if (v != cplx{0.0, 0.0})
                    triplets.emplace_back(static_cast<int>(4 * row + a), static_cast<int>(4 * col + b), v);
            }
    };

    AdoIndex neighbour;
    for (std::size_t i = 0; i < n_ado; ++i) {
        const AdoIndex& n = layout->indices[i];
        cplx damping = 0.0;
        for (std::size_t k = 0; k < modes.size(); ++k) damping += static_cast<double>(n.indices[k]) * modes[k].rate;
        Mat4 diag = base;
        diag.diagonal().array() += -I_unit * damping;
        push_block(i, i, diag, 1.0);

        neighbour = n;
        for (std::size_t k = 0; k < modes.size(); ++k) {
            if (n.indices[k] > 0) {
                neighbour.indices[k] -= 1;
                if (auto j = layout->offset_of(neighbour))
                    push_block(i, *j, lower[k], static_cast<double>(n.indices[k]));
                neighbour.indices[k] += 1;
            }
            neighbour.indices[k] += 1;
            if (auto j = layout->offset_of(neighbour)) push_block(i, *j, raise, 1.0);
            neighbour.indices[k] -= 1;
        }
    }

    HierarchyGenerator::Sparse matrix(static_cast<Eigen::Index>(4 * n_ado), static_cast<Eigen::Index>(4 * n_ado));
    matrix.setFromTriplets(triplets.begin(), triplets.end());
    matrix.makeCompressed();
    return HierarchyGenerator(std::move(layout), std::move(matrix), system, expansion, std::move(modes));
}

/// Closed-system generator (no bath exponents).
inline HierarchyGenerator build_closed_generator(const SystemSpec& system) {
    BathExpansion empty;
    return build_generator(system, empty, TruncationSpec{0});
}

struct HierarchyState {
    std::shared_ptr<const AdoLayout> layout;
    VecX ados;
    double time = 0.0;

    Mat2 ado(std::size_t offset) const { return unvectorize(ados.segment<4>(4 * static_cast<Eigen::Index>(offset))); }
};

/// Factorized system-bath state: rho_S in the zero index, every other ADO zero.
inline HierarchyState product_state(const HierarchyGenerator& gen, const Mat2& rho, double time = 0.0) {
    HierarchyState s{gen.layout(), VecX::Zero(static_cast<Eigen::Index>(gen.dimension())), time};
    s.ados.head<4>() = vectorize(rho);
    return s;
}

inline Mat2 reduced_state(const HierarchyState& state) { return state.ado(0); }

/// <H_I> = sum over first-tier ADOs of Tr[V rho_n].
inline double interaction_energy(const HierarchyState& state, const SystemSpec& system) {
    if (state.layout->depth < 1 && !state.layout->tier_one.empty())
        throw InvalidArgument("interaction_energy requires depth >= 1");
    cplx sum = 0.0;
    for (std::size_t off : state.layout->tier_one) sum += (system.coupling * state.ado(off)).trace();
    if (std::abs(sum.imag()) > 1e-8)
        throw ConventionError("interaction energy has imaginary residue " + std::to_string(sum.imag()));
    return sum.real();
}

/// Solves gen x = 0 with Tr rho_S = 1 by sparse LU, replacing the equation for
/// the (0,0) element of rho_S with the trace constraint.
inline HierarchyState steady_state(const HierarchyGenerator& gen) {
    using Col = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;
    const auto& m = gen.matrix();
    const Eigen::Index dim = m.rows();

    // Solve in scaled-ADO variables y_n = rho_n / prod_k s_k^{n_k}, s_k = sqrt|c_k|.
    // The unscaled hierarchy is badly balanced at weak coupling (raising terms
    // O(1), lowering terms O(alpha)) and LU then loses most of its digits.
    const auto& layout = *gen.layout();
    std::vector<double> mode_scale;
    for (const auto& mode : gen.modes()) {
        const double s = std::sqrt(std::abs(mode.commutator_amplitude) + std::abs(mode.anticommutator_amplitude));
        mode_scale.push_back(s > 0.0 ? s : 1.0);
    }
    std::vector<double> ado_scale(layout.size(), 1.0);
    for (std::size_t i = 0; i < layout.size(); ++i)
        for (std::size_t k = 0; k < mode_scale.size(); ++k)
            ado_scale[i] *= std::pow(mode_scale[k], layout.indices[i].indices[k]);

    std::vector<Eigen::Triplet<cplx>> triplets;
    triplets.reserve(static_cast<std::size_t>(m.nonZeros()) + 2);
    for (Eigen::Index r = 1; r < m.outerSize(); ++r)
        for (HierarchyGenerator::Sparse::InnerIterator it(m, r); it; ++it)
            triplets.emplace_back(static_cast<int>(r), static_cast<int>(it.col()),
                                  it.value() * (ado_scale[static_cast<std::size_t>(it.col() / 4)] /
                                                ado_scale[static_cast<std::size_t>(r / 4)]));
    triplets.emplace_back(0, 0, 1.0);
    triplets.emplace_back(0, 3, 1.0);
    Col a(dim, dim);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();

    Eigen::SparseLU<Col, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success)
        throw DegenerateSteadyState("steady state is not unique: " + lu.lastErrorMessage());

    VecX rhs = VecX::Zero(dim);
    rhs(0) = 1.0;
    VecX y = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !y.allFinite())
        throw DegenerateSteadyState("steady state is not unique: solve failed");
    for (int sweep = 0; sweep < 2; ++sweep) {
        const VecX r = rhs - a * y;
        y += lu.solve(r);
    }
    VecX x(dim);
    for (Eigen::Index i = 0; i < dim; ++i) x(i) = y(i) * ado_scale[static_cast<std::size_t>(i / 4)];

    // A numerically singular pivot shows up as a huge solution or a residual
    // far above round-off.
    const double x_norm = x.cwiseAbs().maxCoeff();
    const double residual = (m * x).cwiseAbs().maxCoeff();
    if (x_norm > 1e8 || residual > 1e-12 * std::max(1.0, gen.norm()) * x_norm)
        throw DegenerateSteadyState("steady state is not unique: residual " + std::to_string(residual) +
                                    ", solution norm " + std::to_string(x_norm));
    return HierarchyState{gen.layout(), std::move(x), 0.0};
}

} // namespace qotto
