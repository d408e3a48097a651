#pragma once

#include <Eigen/Dense>

#include <complex>

namespace qotto {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;
using Mat4 = Eigen::Matrix4cd;
using VecX = Eigen::VectorXcd;

inline constexpr cplx I_unit{0.0, 1.0};

inline Mat2 pauli_x() {
    Mat2 m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

inline Mat2 pauli_y() {
    Mat2 m;
    m << 0.0, -I_unit, I_unit, 0.0;
    return m;
}

inline Mat2 pauli_z() {
    Mat2 m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

inline Mat2 identity2() { return Mat2::Identity(); }

// Column-major vectorisation: vec(A X B) = (B^T kron A) vec(X).
inline Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

inline Mat4 left_multiplication(const Mat2& a) { return kron(identity2(), a); }
inline Mat4 right_multiplication(const Mat2& b) { return kron(b.transpose(), identity2()); }

/// Superoperator of X -> [A, X].
inline Mat4 commutator_superop(const Mat2& a) {
    return left_multiplication(a) - right_multiplication(a);
}

/// Superoperator of X -> {A, X}.
inline Mat4 anticommutator_superop(const Mat2& a) {
    return left_multiplication(a) + right_multiplication(a);
}

inline Eigen::Vector4cd vectorize(const Mat2& m) {
    return Eigen::Vector4cd(m(0, 0), m(1, 0), m(0, 1), m(1, 1));
}

template <typename Derived>
Mat2 unvectorize(const Eigen::MatrixBase<Derived>& v) {
    Mat2 m;
    m << v(0), v(2), v(1), v(3);
    return m;
}

inline double hermiticity_defect(const Mat2& m) { return (m - m.adjoint()).norm(); }

} // namespace qotto
