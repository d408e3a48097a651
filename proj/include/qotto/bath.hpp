#pragma once

// Underdamped Brownian-oscillator baths and their exponential (Matsubara)
// decomposition. Units: hbar = k_B = 1, frequencies in units of omega_h.

#include "qotto/error.hpp"
#include "qotto/linalg.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace qotto {

enum class BathLabel { hot, cold };

inline const char* to_string(BathLabel label) { return label == BathLabel::hot ? "hot" : "cold"; }

struct BathSpec {
    double alpha = 0.0;       // reorganization energy
    double omega0 = 1.0;      // peak frequency
    double gamma_width = 0.05;
    double beta = 1.0;        // inverse temperature
    BathLabel label = BathLabel::hot;

    void validate() const {
        const std::string who = std::string(to_string(label)) + " bath: ";
        if (!(alpha >= 0.0)) throw InvalidArgument(who + "alpha >= 0 violated");
        if (!(omega0 > 0.0)) throw InvalidArgument(who + "omega0 > 0 violated");
        if (!(gamma_width > 0.0)) throw InvalidArgument(who + "gamma_width > 0 violated");
        if (!(beta > 0.0)) throw InvalidArgument(who + "beta > 0 violated");
        if (!(omega0 > 0.5 * gamma_width))
            throw InvalidArgument(who + "underdamped regime omega0 > gamma_width/2 violated");
    }

    double damping() const { return 0.5 * gamma_width; }
    double ringing_frequency() const {
        return std::sqrt(omega0 * omega0 - damping() * damping());
    }
};

/// J(w) = alpha Gamma w0^2 w / ((w0^2 - w^2)^2 + Gamma^2 w^2)
inline double spectral_density(double omega, const BathSpec& spec) {
    const double w0sq = spec.omega0 * spec.omega0;
    const double d = w0sq - omega * omega;
    return spec.alpha * spec.gamma_width * w0sq * omega /
           (d * d + spec.gamma_width * spec.gamma_width * omega * omega);
}

/// One exponential c * exp(-i z t) with Im z <= 0.
struct ExpTerm {
    cplx amplitude;
    cplx rate;
};

struct BathExpansion {
    BathSpec spec;
    int matsubara_cutoff = 0;
    std::vector<ExpTerm> symmetric;      // real part C^+(t)
    std::vector<ExpTerm> antisymmetric;  // imaginary part C^-(t)
    double terminator = 0.0;             // sum_{k>K} c_k / nu_k, weight of delta(t)
    double Omega = 0.0;
    double gamma = 0.0;
    std::vector<double> matsubara_freqs;

    std::size_t size() const { return symmetric.size() + antisymmetric.size(); }
};

inline double matsubara_frequency(int k, double beta) {
    return 2.0 * std::numbers::pi * k / beta;
}

/// Amplitude of the k-th Matsubara exponential exp(-nu_k t), k >= 1.
inline double matsubara_amplitude(const BathSpec& spec, int k) {
    const double Om = spec.ringing_frequency();
    const double g = spec.damping();
    const double nu = matsubara_frequency(k, spec.beta);
    const double a = Om * Om + g * g - nu * nu;
    return -(4.0 * spec.alpha * spec.omega0 * spec.omega0 * g / spec.beta) * nu /
           (a * a + 4.0 * Om * Om * nu * nu);
}

/// Closed form of sum_{k>=1} c_k / nu_k.
inline double matsubara_full_sum(const BathSpec& spec) {
    const double Om = spec.ringing_frequency();
    const double g = spec.damping();
    const double b = spec.beta;
    const double r2 = Om * Om + g * g;
    // Numerator and denominator divided by cosh(beta Omega) to stay finite at low temperature.
    const double ch = std::cosh(b * Om);
    const double num = b * g * std::tanh(b * Om) + b * Om * std::sin(b * g) / ch;
    const double den = 4.0 * Om * g * r2 * (1.0 - std::cos(b * g) / ch);
    return -(2.0 * spec.alpha * g * spec.omega0 * spec.omega0 / b) * (num / den - 1.0 / (r2 * r2));
}

/// Residual Matsubara weight after the first K explicit terms.
inline double matsubara_terminator(const BathSpec& spec, int cutoff) {
    if (cutoff < 0) throw InvalidArgument("matsubara cutoff K >= 0 violated");
    double sum = matsubara_full_sum(spec);
    for (int k = 1; k <= cutoff; ++k)
        sum -= matsubara_amplitude(spec, k) / matsubara_frequency(k, spec.beta);
    return sum;
}

inline BathExpansion expand_correlation(const BathSpec& spec, int cutoff) {
    spec.validate();
    if (cutoff < 0) throw InvalidArgument("matsubara cutoff K >= 0 violated");

    BathExpansion ex;
    ex.spec = spec;
    ex.matsubara_cutoff = cutoff;
    ex.Omega = spec.ringing_frequency();
    ex.gamma = spec.damping();

    const double Om = ex.Omega;
    const double g = ex.gamma;
    const double scale = spec.alpha * spec.omega0 * spec.omega0 / (4.0 * Om);
    const cplx z_pos{Om, -g};   // exp(-i Omega t - gamma t)
    const cplx z_neg{-Om, -g};  // exp(+i Omega t - gamma t)
    const cplx coth_pos = 1.0 / std::tanh(0.5 * spec.beta * cplx{Om, -g});
    const cplx coth_neg = 1.0 / std::tanh(0.5 * spec.beta * cplx{Om, g});

    ex.symmetric.push_back({scale * coth_pos, z_pos});
    ex.symmetric.push_back({scale * coth_neg, z_neg});
    ex.antisymmetric.push_back({-I_unit * scale, z_pos});
    ex.antisymmetric.push_back({I_unit * scale, z_neg});

    for (int k = 1; k <= cutoff; ++k) {
        const double nu = matsubara_frequency(k, spec.beta);
        ex.matsubara_freqs.push_back(nu);
        ex.symmetric.push_back({matsubara_amplitude(spec, k), cplx{0.0, -nu}});
    }
    ex.terminator = matsubara_terminator(spec, cutoff);
    return ex;
}

/// C(t) = C^+(t) + i C^-(t) from the explicit exponentials; the terminator's
/// delta weight is not included.
inline cplx correlation_function(double t, const BathExpansion& ex) {
    if (t < 0.0) throw InvalidArgument("correlation_function requires t >= 0");
    cplx sym = 0.0;
    cplx anti = 0.0;
    for (const auto& term : ex.symmetric) sym += term.amplitude * std::exp(-I_unit * term.rate * t);
    for (const auto& term : ex.antisymmetric) anti += term.amplitude * std::exp(-I_unit * term.rate * t);
    return sym + I_unit * anti;
}

/// Gamma(w) = int_0^inf C(t) e^{i w t} dt, with the terminator counted as a
/// full-weight delta at t = 0.
inline cplx half_fourier(const BathExpansion& ex, double omega) {
    cplx out = ex.terminator;
    for (const auto& term : ex.symmetric) out += -I_unit * term.amplitude / (term.rate - omega);
    for (const auto& term : ex.antisymmetric) out += term.amplitude / (term.rate - omega);
    return out;
}

} // namespace qotto
