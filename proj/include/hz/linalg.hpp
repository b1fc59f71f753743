#pragma once

// Dense 3x3 helpers for the Newton solver and the saddle-focus
// eigen-decomposition. Characteristic-polynomial root finding is perfectly
// stable here: the spectra we meet have one real eigenvalue O(1) and a
// complex pair with imaginary part ~ alpha/delta, far from coincidence.

#include "hz/complex.hpp"
#include "hz/real.hpp"

#include <array>
#include <stdexcept>

namespace hz {

using Vec3 = std::array<Real, 3>;
using Mat3 = std::array<std::array<Real, 3>, 3>;
using CVec3 = std::array<Cplx, 3>;

inline Real norm_inf(const Vec3& v) {
    return std::max({abs(v[0]), abs(v[1]), abs(v[2])});
}

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(const Real& s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Real dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Real norm2(const Vec3& a) { return sqrt(dot(a, a)); }

inline Vec3 mat_vec(const Mat3& m, const Vec3& v) {
    Vec3 out;
    for (int i = 0; i < 3; i++) out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    return out;
}

// Gaussian elimination with partial pivoting.
inline Vec3 solve3(Mat3 a, Vec3 b) {
    for (int col = 0; col < 3; col++) {
        int piv = col;
        for (int r = col + 1; r < 3; r++)
            if (abs(a[r][col]) > abs(a[piv][col])) piv = r;
        if (a[piv][col] == 0) throw std::runtime_error("solve3: singular matrix");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < 3; r++) {
            Real f = a[r][col] / a[col][col];
            for (int c = col; c < 3; c++) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    Vec3 x;
    for (int r = 2; r >= 0; r--) {
        Real s = b[r];
        for (int c = r + 1; c < 3; c++) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

inline CVec3 solve3(std::array<std::array<Cplx, 3>, 3> a, CVec3 b) {
    for (int col = 0; col < 3; col++) {
        int piv = col;
        for (int r = col + 1; r < 3; r++)
            if (abs(a[r][col]) > abs(a[piv][col])) piv = r;
        if (abs(a[piv][col]) == 0) throw std::runtime_error("solve3: singular complex matrix");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < 3; r++) {
            Cplx f = a[r][col] / a[col][col];
            for (int c = col; c < 3; c++) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    CVec3 x;
    for (int r = 2; r >= 0; r--) {
        Cplx s = b[r];
        for (int c = r + 1; c < 3; c++) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

struct Eigen3 {
    Real real_eigenvalue;
    Vec3 real_eigenvector;       // unit norm
    Cplx complex_eigenvalue;     // the member with positive imaginary part
    CVec3 complex_eigenvector;
};

// Spectrum of a real 3x3 with one real eigenvalue and a complex pair.
// Fails if the discriminant says all three roots are real.
inline Eigen3 eigen_saddle_focus(const Mat3& a) {
    // characteristic polynomial x^3 + c2 x^2 + c1 x + c0
    Real tr = a[0][0] + a[1][1] + a[2][2];
    Real m00 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    Real m11 = a[0][0] * a[2][2] - a[0][2] * a[2][0];
    Real m22 = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    Real det = a[0][0] * m00 - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    Real c2 = -tr, c1 = m00 + m11 + m22, c0 = -det;

    auto p = [&](const Real& x) { return ((x + c2) * x + c1) * x + c0; };
    auto dp = [&](const Real& x) { return (3 * x + 2 * c2) * x + c1; };

    // The real root is an attracting Newton target from far out on the side
    // where the cubic is monotone; try both ends and keep the converged one.
    Real scale = 1 + abs(c2) + abs(c1) + abs(c0);
    Real root;
    bool found = false;
    for (Real x0 : {scale, -scale, Real(0)}) {
        Real x = x0;
        bool ok = false;
        for (int it = 0; it < 300; it++) {
            Real d = dp(x);
            if (d == 0) break;
            Real step = p(x) / d;
            x -= step;
            if (abs(step) <= ldexp(abs(x) + 1, -static_cast<long>(current_precision_bits()) + 8)) {
                ok = true;
                break;
            }
        }
        if (ok && abs(p(x)) < scale * ldexp(Real(1), -static_cast<long>(current_precision_bits()) / 2)) {
            root = x;
            found = true;
            break;
        }
    }
    if (!found) throw std::runtime_error("eigen_saddle_focus: real-root Newton failed");

    // deflate: x^3 + c2 x^2 + c1 x + c0 = (x - root)(x^2 + beta x + gamma)
    Real beta = c2 + root;
    Real gamma = c1 + root * beta;
    Real disc = beta * beta - 4 * gamma;
    if (disc >= 0)
        throw std::runtime_error("eigen_saddle_focus: spectrum is all-real, not saddle-focus");
    Cplx lam(-beta / 2, sqrt(-disc) / 2);

    Eigen3 out;
    out.real_eigenvalue = root;
    out.complex_eigenvalue = lam;

    // eigenvector for the real eigenvalue: null vector of (A - root I) by
    // inverse-iteration-style solve with a shifted system
    {
        Mat3 shifted = a;
        for (int i = 0; i < 3; i++) shifted[i][i] -= root;
        // pick the column pair giving the best-conditioned 2x2; use cross of two rows
        Vec3 r0 = {shifted[0][0], shifted[0][1], shifted[0][2]};
        Vec3 r1 = {shifted[1][0], shifted[1][1], shifted[1][2]};
        Vec3 r2 = {shifted[2][0], shifted[2][1], shifted[2][2]};
        auto cross = [](const Vec3& u, const Vec3& v) {
            return Vec3{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
        };
        Vec3 cands[3] = {cross(r0, r1), cross(r1, r2), cross(r0, r2)};
        int best = 0;
        for (int i = 1; i < 3; i++)
            if (norm2(cands[i]) > norm2(cands[best])) best = i;
        Real n = norm2(cands[best]);
        if (n == 0) throw std::runtime_error("eigen_saddle_focus: defective real eigenvector");
        out.real_eigenvector = (Real(1) / n) * cands[best];
    }

    // complex eigenvector: null vector of (A - lam I) via complex cross product
    {
        std::array<std::array<Cplx, 3>, 3> s;
        for (int i = 0; i < 3; i++)
            for (int j = 0; j < 3; j++) s[i][j] = Cplx(a[i][j]);
        for (int i = 0; i < 3; i++) s[i][i] -= lam;
        auto crossc = [](const CVec3& u, const CVec3& v) {
            return CVec3{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
                         u[0] * v[1] - u[1] * v[0]};
        };
        CVec3 r0 = {s[0][0], s[0][1], s[0][2]};
        CVec3 r1 = {s[1][0], s[1][1], s[1][2]};
        CVec3 r2 = {s[2][0], s[2][1], s[2][2]};
        CVec3 cands[3] = {crossc(r0, r1), crossc(r1, r2), crossc(r0, r2)};
        auto cnorm = [](const CVec3& v) { return sqrt(norm_sq(v[0]) + norm_sq(v[1]) + norm_sq(v[2])); };
        int best = 0;
        for (int i = 1; i < 3; i++)
            if (cnorm(cands[i]) > cnorm(cands[best])) best = i;
        Real n = cnorm(cands[best]);
        if (n == 0) throw std::runtime_error("eigen_saddle_focus: defective complex eigenvector");
        for (auto& c : cands[best]) c = c / n;
        out.complex_eigenvector = cands[best];
    }
    return out;
}

}  // namespace hz
