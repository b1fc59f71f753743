#pragma once

// Complex scalar over hz::Real. std::complex is only specified for the
// built-in floating types, so we carry our own minimal value type with the
// transcendental functions the integrals need. Principal branches throughout.

#include "hz/real.hpp"

namespace hz {

struct Cplx {
    Real re{0};
    Real im{0};

    Cplx() = default;
    Cplx(Real r) : re(std::move(r)) {}
    Cplx(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
    Cplx(int r) : re(r) {}
    Cplx(long r) : re(r) {}
    Cplx(double r) : re(r) {}

    Cplx& operator+=(const Cplx& o) { re += o.re; im += o.im; return *this; }
    Cplx& operator-=(const Cplx& o) { re -= o.re; im -= o.im; return *this; }
    Cplx& operator*=(const Cplx& o) {
        Real r = re * o.re - im * o.im;
        im = re * o.im + im * o.re;
        re = r;
        return *this;
    }
    Cplx& operator/=(const Cplx& o) {
        Real d = o.re * o.re + o.im * o.im;
        Real r = (re * o.re + im * o.im) / d;
        im = (im * o.re - re * o.im) / d;
        re = r;
        return *this;
    }
};

inline Cplx operator+(Cplx a, const Cplx& b) { return a += b; }
inline Cplx operator-(Cplx a, const Cplx& b) { return a -= b; }
inline Cplx operator*(Cplx a, const Cplx& b) { return a *= b; }
inline Cplx operator/(Cplx a, const Cplx& b) { return a /= b; }
inline Cplx operator-(const Cplx& a) { return Cplx(-a.re, -a.im); }
inline Cplx operator*(const Real& s, Cplx a) { a.re *= s; a.im *= s; return a; }
inline Cplx operator*(Cplx a, const Real& s) { a.re *= s; a.im *= s; return a; }
inline Cplx operator/(Cplx a, const Real& s) { a.re /= s; a.im /= s; return a; }
inline bool operator==(const Cplx& a, const Cplx& b) { return a.re == b.re && a.im == b.im; }

inline Cplx conj(const Cplx& a) { return Cplx(a.re, -a.im); }
inline Real abs(const Cplx& a) { return hypot(a.re, a.im); }
inline Real norm_sq(const Cplx& a) { return a.re * a.re + a.im * a.im; }
inline Real arg(const Cplx& a) { return atan2(a.im, a.re); }

inline Cplx imag_unit() { return Cplx(Real(0), Real(1)); }

inline Cplx exp(const Cplx& a) {
    Real m = exp(a.re);
    return Cplx(m * cos(a.im), m * sin(a.im));
}

// Principal logarithm: imaginary part in (-pi, pi].
inline Cplx log(const Cplx& a) { return Cplx(log(abs(a)), arg(a)); }

inline Cplx pow(const Cplx& base, const Cplx& expo) {
    if (base.re == 0 && base.im == 0) {
        if (expo.re == 0 && expo.im == 0) return Cplx(Real(1));
        return Cplx();
    }
    return exp(expo * log(base));
}

inline Cplx pow(const Cplx& base, const Real& expo) { return pow(base, Cplx(expo)); }

inline Cplx pow_int(Cplx base, long n) {
    if (n == 0) return Cplx(Real(1));
    bool neg = n < 0;
    unsigned long k = neg ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
    Cplx acc(Real(1));
    while (k) {
        if (k & 1) acc *= base;
        base *= base;
        k >>= 1;
    }
    return neg ? Cplx(Real(1)) / acc : acc;
}

inline Cplx sqrt(const Cplx& a) {
    if (a.im == 0 && a.re >= 0) return Cplx(sqrt(a.re));
    Real m = abs(a);
    Real r = sqrt((m + a.re) / 2);
    Real i = sqrt((m - a.re) / 2);
    return Cplx(r, a.im < 0 ? -i : i);
}

inline Cplx cosh(const Cplx& a) {
    return Cplx(cosh(a.re) * cos(a.im), sinh(a.re) * sin(a.im));
}

inline Cplx sinh(const Cplx& a) {
    return Cplx(sinh(a.re) * cos(a.im), cosh(a.re) * sin(a.im));
}

inline Cplx sin(const Cplx& a) {
    return Cplx(sin(a.re) * cosh(a.im), cos(a.re) * sinh(a.im));
}

inline bool is_finite(const Cplx& a) { return is_finite(a.re) && is_finite(a.im); }

// i^n for integer n, exact.
inline Cplx ipow(long n) {
    switch (((n % 4) + 4) % 4) {
        case 0: return Cplx(Real(1));
        case 1: return Cplx(Real(0), Real(1));
        case 2: return Cplx(Real(-1));
        default: return Cplx(Real(0), Real(-1));
    }
}

}  // namespace hz
