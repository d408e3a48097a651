#pragma once

#include "qotto/qotto.hpp"

#include <random>

namespace qtest {

using qotto::cplx;
using qotto::Mat2;

/// Deterministic source for the hand-rolled generators below.
inline std::mt19937_64& rng() {
    static std::mt19937_64 g(0x5eed0770ULL);
    return g;
}

inline double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline cplx gaussian_c() {
    std::normal_distribution<double> n(0.0, 1.0);
    return {n(rng()), n(rng())};
}

/// Random full-rank qubit state from a Ginibre matrix.
inline Mat2 random_density() {
    Mat2 g;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) g(i, j) = gaussian_c();
    Mat2 r = g * g.adjoint();
    return r / r.trace().real();
}

inline Mat2 random_pure() {
    Eigen::Vector2cd v(gaussian_c(), gaussian_c());
    v.normalize();
    return v * v.adjoint();
}

inline Mat2 random_unitary() {
    Mat2 g;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) g(i, j) = gaussian_c();
    Eigen::HouseholderQR<Mat2> qr(g);
    return qr.householderQ();
}

inline qotto::SystemSpec default_system(double omega = 1.0) {
    qotto::SystemSpec s;
    s.omega = omega;
    return s;
}

inline qotto::BathSpec hot_bath(double alpha = 1e-2) { return {alpha, 1.0, 0.05, 0.5, qotto::BathLabel::hot}; }
inline qotto::BathSpec cold_bath(double alpha = 1e-2) { return {alpha, 0.5, 0.05, 2.5, qotto::BathLabel::cold}; }

} // namespace qtest
