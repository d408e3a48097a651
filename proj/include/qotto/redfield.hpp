#pragma once

// Second-order Bloch-Redfield master equation
//   d/dt rho = -i[H, rho] - [V, L rho - rho L^dag],   L = sum_w G(w) V(w),
// where V(w) collects the eigenbasis components of V that lower the energy by
// w and G(w) is the half-sided Fourier transform of C(t) taken from the same
// exponential expansion the hierarchy uses.

#include "qotto/bath.hpp"
#include "qotto/integrator.hpp"
#include "qotto/system.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <vector>

namespace qotto {

struct RedfieldModel {
    SystemSpec system;
    BathSpec spec;
    BathExpansion expansion;
    bool secular = false;
    Mat4 generator;  // column-major vectorisation
};

inline RedfieldModel make_redfield_model(const SystemSpec& system, const BathSpec& spec, int cutoff,
                                         bool secular = false) {
    system.validate();
    RedfieldModel m{system, spec, expand_correlation(spec, cutoff), secular, Mat4::Zero()};

    const Mat2 h = system.hamiltonian();
    Eigen::SelfAdjointEigenSolver<Mat2> es(h);
    const Eigen::Vector2d energies = es.eigenvalues();
    const Mat2 basis = es.eigenvectors();
    const Mat2 v = system.coupling;
    const Mat2 v_eig = basis.adjoint() * v * basis;

    // L = sum_{a,b} G(E_b - E_a) |a><a| V |b><b|, assembled in the eigenbasis; the
    // Matsubara tail beyond K enters G as its zero-frequency weight.
    Mat2 lambda_eig = Mat2::Zero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            lambda_eig(a, b) =
                (half_fourier(m.expansion, energies(b) - energies(a)) + m.expansion.terminator) * v_eig(a, b);

    const Mat4 unitary_eig = -I_unit * commutator_superop(energies.cast<cplx>().asDiagonal().toDenseMatrix());
    const Mat2 ld = lambda_eig.adjoint();
    // X -> -[V, L X - X L^dag] = -(V L X - V X L^dag - L X V + X L^dag V)
    Mat4 dissipator = -(left_multiplication(v_eig * lambda_eig) - left_multiplication(v_eig) * right_multiplication(ld) -
                        left_multiplication(lambda_eig) * right_multiplication(v_eig) +
                        right_multiplication(ld * v_eig));

    if (secular) {
        // Entry (i, j) couples rho_{ab} to rho_{cd} with vec index i = a + 2b.
        auto bohr = [&](int idx) { return energies(idx % 2) - energies(idx / 2); };
        const double scale = std::max(1.0, energies.cwiseAbs().maxCoeff());
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (std::abs(bohr(i) - bohr(j)) > 1e-9 * scale) dissipator(i, j) = 0.0;
    }

    const Mat4 to_site = kron(basis.conjugate(), basis);  // vec(U X U^dag) = (conj(U) kron U) vec(X)
    m.generator = to_site * (unitary_eig + dissipator) * to_site.adjoint();
    return m;
}

namespace detail {

struct RedfieldRhs {
    Mat4 gen;
    void operator()(const VecX& x, VecX& y) const { y.noalias() = gen * x; }
};

} // namespace detail

inline std::vector<Mat2> brme_propagate(const RedfieldModel& model, const Mat2& rho0, const std::vector<double>& grid,
                                        const IntegratorOptions& opt = {}) {
    VecX x = vectorize(rho0);
    DormandPrince<detail::RedfieldRhs> stepper(detail::RedfieldRhs{model.generator}, x, 0.0, opt);
    std::vector<Mat2> out;
    out.reserve(grid.size());
    double prev = 0.0;
    for (double t : grid) {
        if (t < prev) throw InvalidArgument("time grid must be sorted and non-negative");
        prev = t;
        stepper.advance_to(t);
        out.push_back(unvectorize(stepper.state()));
    }
    return out;
}

/// Stationary state of the Redfield generator with unit trace.
inline Mat2 brme_steady_state(const RedfieldModel& model) {
    Mat4 a = model.generator;
    a.row(0) << 1.0, 0.0, 0.0, 1.0;
    Eigen::Vector4cd rhs = Eigen::Vector4cd::Zero();
    rhs(0) = 1.0;
    Eigen::FullPivLU<Mat4> lu(a);
    if (!lu.isInvertible()) throw DegenerateSteadyState("Redfield steady state is not unique");
    return unvectorize(lu.solve(rhs));
}

} // namespace qotto
