#pragma once

// Direct quadrature of the bath correlation function
//   C(t) = (1/pi) int_0^inf J(w) [coth(beta w / 2) cos(w t) - i sin(w t)] dw,
// used as an independent reference for the exponential expansion.

#include "qotto/bath.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>

namespace qotto {

struct QuadratureOptions {
    double abs_tol = 1e-9;
    double upper_factor = 50.0;  // explicit range [0, upper_factor * omega0]
    unsigned max_depth = 18;
};

namespace detail {

// J(w) coth(beta w / 2), finite at w = 0.
inline double symmetric_weight(double omega, const BathSpec& spec) {
    const double x = 0.5 * spec.beta * omega;
    const double x_coth = std::abs(x) < 1e-8 ? 1.0 : x / std::tanh(x);
    const double w0sq = spec.omega0 * spec.omega0;
    const double d = w0sq - omega * omega;
    const double reduced = spec.alpha * spec.gamma_width * w0sq /
                           (d * d + spec.gamma_width * spec.gamma_width * omega * omega);
    return reduced * x_coth * 2.0 / spec.beta;
}

template <typename F>
double integrate_pieces(F&& f, const std::vector<double>& cuts, const QuadratureOptions& opt) {
    using boost::math::quadrature::gauss_kronrod;
    double total = 0.0;
    const double per_piece_tol = opt.abs_tol / static_cast<double>(cuts.size());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double err = 0.0;
        total += gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], opt.max_depth,
                                                      per_piece_tol, &err);
    }
    return total;
}

} // namespace detail

inline cplx correlation_quadrature(double t, const BathSpec& spec, const QuadratureOptions& opt = {}) {
    spec.validate();
    const double w0 = spec.omega0;
    const double G = spec.gamma_width;
    const double upper = opt.upper_factor * w0;

    std::vector<double> cuts{0.0};
    for (double c : {w0 - 10.0 * G, w0 - G, w0, w0 + G, w0 + 10.0 * G, 4.0 * w0})
        if (c > cuts.back() && c < upper) cuts.push_back(c);
    cuts.push_back(upper);

    auto re_f = [&](double w) { return detail::symmetric_weight(w, spec) * std::cos(w * t); };
    auto im_f = [&](double w) { return -spectral_density(w, spec) * std::sin(w * t); };

    double re = detail::integrate_pieces(re_f, cuts, opt);
    double im = detail::integrate_pieces(im_f, cuts, opt);

    // Tail beyond the explicit range.
    if (t < 1.0) {
        const double far = 40.0 * upper;
        std::vector<double> tail_cuts;
        for (double c = upper; c < far; c *= 2.0) tail_cuts.push_back(c);
        tail_cuts.push_back(far);
        re += detail::integrate_pieces(re_f, tail_cuts, opt);
        im += detail::integrate_pieces(im_f, tail_cuts, opt);
        // J ~ alpha Gamma w0^2 / w^3 beyond `far`; only the t -> 0 piece is above tolerance.
        if (t * far < 1.0) re += spec.alpha * G * w0 * w0 / (2.0 * far * far);
    } else {
        // Two terms of integration by parts for int_upper^inf f(w) {cos, sin}(w t) dw.
        const double h = 1e-4 * upper;
        const double f_re = detail::symmetric_weight(upper, spec);
        const double df_re = (detail::symmetric_weight(upper + h, spec) -
                              detail::symmetric_weight(upper - h, spec)) / (2.0 * h);
        const double f_im = spectral_density(upper, spec);
        const double df_im = (spectral_density(upper + h, spec) - spectral_density(upper - h, spec)) / (2.0 * h);
        const double s = std::sin(upper * t);
        const double c = std::cos(upper * t);
        re += -f_re * s / t - df_re * c / (t * t);
        im += -(f_im * c / t - df_im * s / (t * t));
    }
    return cplx{re, im} / std::numbers::pi;
}

} // namespace qotto
