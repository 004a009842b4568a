#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <utility>

namespace wgmgyro {

using cplx = std::complex<double>;

// Dense 2x2 complex matrix, row major. Everything in this project is a 2x2
// problem, so the matrix is a value type and all operations are closed form.
struct Mat2 {
    cplx m00{}, m01{}, m10{}, m11{};

    cplx trace() const { return m00 + m11; }
    cplx det() const { return m00 * m11 - m01 * m10; }

    Mat2 operator+(const Mat2& o) const { return {m00 + o.m00, m01 + o.m01, m10 + o.m10, m11 + o.m11}; }
    Mat2 operator-(const Mat2& o) const { return {m00 - o.m00, m01 - o.m01, m10 - o.m10, m11 - o.m11}; }
    Mat2 operator*(const Mat2& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }
    Mat2 operator*(cplx s) const { return {m00 * s, m01 * s, m10 * s, m11 * s}; }

    Mat2 adjoint() const {
        return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
    }

    std::array<cplx, 2> apply(const std::array<cplx, 2>& v) const {
        return {m00 * v[0] + m01 * v[1], m10 * v[0] + m11 * v[1]};
    }

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diag(cplx a, cplx b) { return {a, 0.0, 0.0, b}; }
};

// Roots of z^2 + bz + c with the numerically stable formulation: the larger
// root by |.| is computed directly, the smaller via c / z1 (avoids
// cancellation when b^2 >> c).
inline std::pair<cplx, cplx> quadratic_roots(cplx b, cplx c) {
    const cplx disc = std::sqrt(b * b - 4.0 * c);
    // pick the sign that adds magnitudes instead of cancelling
    const cplx q = (std::real(std::conj(b) * disc) >= 0.0) ? -0.5 * (b + disc) : -0.5 * (b - disc);
    if (q == cplx(0.0, 0.0)) return {cplx(0.0, 0.0), cplx(0.0, 0.0)};
    return {q, c / q};
}

// Generic eigenvalues through the characteristic polynomial
// lambda^2 - tr*lambda + det. This is the independent route used to
// cross-check closed-form mode frequencies; keep it free of any
// model-specific shortcuts.
inline std::pair<cplx, cplx> eigenvalues(const Mat2& m) {
    return quadratic_roots(-m.trace(), m.det());
}

namespace detail {

// f(M) for analytic f via the spectral decomposition of a 2x2:
//   f(M) = f(l1) (M - l2 I)/(l1 - l2) + f(l2) (M - l1 I)/(l2 - l1)
// with the confluent limit f(M) = f(l) I + f'(l) (M - l I) when l1 ~ l2
// (exact for 2x2 because (M - l I)^2 = 0 at a defective double eigenvalue).
template <class F, class DF>
Mat2 analytic_apply(const Mat2& m, F f, DF df) {
    auto [l1, l2] = eigenvalues(m);
    const double scale = std::abs(l1) + std::abs(l2) + 1.0;
    const Mat2 eye = Mat2::identity();
    if (std::abs(l1 - l2) < 1e-9 * scale) {
        const cplx l = 0.5 * (l1 + l2);
        return eye * f(l) + (m - eye * l) * df(l);
    }
    const Mat2 p1 = (m - eye * l2) * (1.0 / (l1 - l2));
    const Mat2 p2 = (m - eye * l1) * (1.0 / (l2 - l1));
    return p1 * f(l1) + p2 * f(l2);
}

inline cplx expm1c(cplx z) {
    if (std::abs(z) > 1e-4) return std::exp(z) - 1.0;
    // series, |z| small: z (1 + z/2 (1 + z/3 (1 + z/4)))
    return z * (1.0 + z / 2.0 * (1.0 + z / 3.0 * (1.0 + z / 4.0)));
}

// phi1(z) = (e^z - 1)/z, phi1(0) = 1
inline cplx phi1(cplx z) {
    if (std::abs(z) < 1e-8) return 1.0 + z / 2.0 + z * z / 6.0;
    return expm1c(z) / z;
}

inline cplx phi1_deriv(cplx z) {
    if (std::abs(z) < 1e-4) return 0.5 + z / 3.0 + z * z / 8.0;
    return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

} // namespace detail

inline Mat2 expm(const Mat2& m) {
    return detail::analytic_apply(
        m, [](cplx z) { return std::exp(z); }, [](cplx z) { return std::exp(z); });
}

// integral_0^1 expm(M s) ds = phi1(M); callers scale M by dt first.
inline Mat2 expm_integral(const Mat2& m) {
    return detail::analytic_apply(
        m, [](cplx z) { return detail::phi1(z); }, [](cplx z) { return detail::phi1_deriv(z); });
}

// Hermitian solution V of the continuous Lyapunov equation M V + V M^H + D = 0
// (D hermitian). Expanded into a real 4x4 system in (v00, v11, Re v01, Im v01)
// and solved by Gaussian elimination with partial pivoting.
inline Mat2 lyapunov_steady(const Mat2& m, const Mat2& d) {
    double A[4][5] = {};
    // unknown order: v00, v11, re w, im w     (V = [[v00, w],[conj w, v11]])
    // eq 0: (MV + VM^H + D)_00 = 0
    A[0][0] = 2.0 * std::real(m.m00);
    A[0][2] = 2.0 * std::real(m.m01);
    A[0][3] = 2.0 * std::imag(m.m01);
    A[0][4] = -std::real(d.m00);
    // eq 1: (..)_11 = 0
    A[1][1] = 2.0 * std::real(m.m11);
    A[1][2] = 2.0 * std::real(m.m10);
    A[1][3] = -2.0 * std::imag(m.m10);
    A[1][4] = -std::real(d.m11);
    // eq 2,3: (..)_01 = 0, real and imaginary parts;
    // (MV + VM^H)_01 = m00 w + m01 v11 + v00 conj(m10) + w conj(m11)
    const cplx s = m.m00 + std::conj(m.m11);
    A[2][0] = std::real(std::conj(m.m10));
    A[2][1] = std::real(m.m01);
    A[2][2] = std::real(s);
    A[2][3] = -std::imag(s);
    A[2][4] = -std::real(d.m01);
    A[3][0] = std::imag(std::conj(m.m10));
    A[3][1] = std::imag(m.m01);
    A[3][2] = std::imag(s);
    A[3][3] = std::real(s);
    A[3][4] = -std::imag(d.m01);

    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
        for (int k = 0; k < 5; ++k) std::swap(A[col][k], A[piv][k]);
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = A[r][col] / A[col][col];
            for (int k = col; k < 5; ++k) A[r][k] -= f * A[col][k];
        }
    }
    const double v00 = A[0][4] / A[0][0];
    const double v11 = A[1][4] / A[1][1];
    const cplx w(A[2][4] / A[2][2], A[3][4] / A[3][3]);
    return {v00, w, std::conj(w), v11};
}

} // namespace wgmgyro
