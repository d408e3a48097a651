#pragma once

#include "qotto/error.hpp"
#include "qotto/linalg.hpp"

#include <cmath>

namespace qotto {

/// Two-level working medium H_S = (omega/2)(r_x sx + r_z sz + 1) = omega |+><+|.
struct SystemSpec {
    double omega = 1.0;
    double r_x = std::sqrt(3.0) / 2.0;
    double r_z = 0.5;
    bool include_identity_shift = true;
    Mat2 coupling = pauli_z();

    void validate() const {
        if (!(omega > 0.0)) throw InvalidArgument("system: omega > 0 violated");
        if (std::abs(r_x * r_x + r_z * r_z - 1.0) > 1e-12)
            throw InvalidArgument("system: r_x^2 + r_z^2 = 1 violated");
        if (hermiticity_defect(coupling) > 1e-14)
            throw InvalidArgument("system: coupling operator must be Hermitian");
    }

    Mat2 hamiltonian() const {
        Mat2 h = 0.5 * omega * (r_x * pauli_x() + r_z * pauli_z());
        if (include_identity_shift) h += 0.5 * omega * identity2();
        return h;
    }

    /// Upper eigenvector |+> of r_x sx + r_z sz (independent of omega).
    Vec2 excited_state() const {
        const double theta = std::atan2(r_x, r_z);
        return Vec2(std::cos(0.5 * theta), std::sin(0.5 * theta));
    }

    Vec2 ground_state() const {
        const double theta = std::atan2(r_x, r_z);
        return Vec2(-std::sin(0.5 * theta), std::cos(0.5 * theta));
    }

    Mat2 excited_projector() const {
        const Vec2 p = excited_state();
        return p * p.adjoint();
    }

    /// exp(-beta H_S) / Z with the ground state at zero energy.
    Mat2 gibbs_state(double beta) const {
        const double w = std::exp(-beta * omega);
        const double p = w / (1.0 + w);
        const Vec2 e = excited_state();
        const Vec2 g = ground_state();
        return p * e * e.adjoint() + (1.0 - p) * g * g.adjoint();
    }

    SystemSpec with_omega(double w) const {
        SystemSpec s = *this;
        s.omega = w;
        return s;
    }
};

} // namespace qotto
