#pragma once

// Special-function kernel: complex Gamma at arbitrary precision, and the
// oscillatory integrals
//
//   I_{n,Q}^{l,C} = int_R e^{-i omega |l| s} sinh^n(d s) / cosh^{Q+1+iC|l|}(d s) ds
//
// by shifted-contour quadrature, Beta closed form (l = 1, n = 0), the
// two-term recurrence in (n, Q), and the large-omega leading term.

#include "hz/complex.hpp"
#include "hz/errors.hpp"
#include "hz/quadrature.hpp"
#include "hz/real.hpp"

namespace hz {

struct ScalarConfig {
    unsigned precision_bits = 256;
    Real quadrature_rel_tol = Real("1e-30");
    Real contour_shift_rho{0};  // 0 = automatic max(8, Q) * d

    void validate() const {
        if (precision_bits < 53) throw std::invalid_argument("ScalarConfig: precision_bits < 53");
        if (!(quadrature_rel_tol > 0))
            throw std::invalid_argument("ScalarConfig: quadrature_rel_tol must be positive");
        if (quadrature_rel_tol < ldexp(Real(1), -static_cast<long>(precision_bits) + 8))
            throw std::invalid_argument(
                "ScalarConfig: quadrature_rel_tol below 2^(8 - precision_bits)");
    }
};

struct IIntegralKey {
    int n = 0;        // sinh power, >= 0
    Real Q{1};        // cosh exponent is Q + 1 + i C |l|; requires Q + 1 > n
    long l = 1;       // 0 selects the average (real line) variant
    Real C{0};
    Real omega{10};   // effective frequency alpha / delta
    Real d{1};

    void validate() const {
        if (n < 0) throw std::invalid_argument("IIntegralKey: n must be >= 0");
        if (!(Q + 1 > n)) throw std::invalid_argument("IIntegralKey: requires Q + 1 > n");
        if (!(omega > 0)) throw std::invalid_argument("IIntegralKey: omega must be positive");
        if (!(d > 0)) throw std::invalid_argument("IIntegralKey: d must be positive");
    }
};

// Gamma(z), relative error within 2^(16 - working precision). Throws
// pole_error at nonpositive integers.
Cplx gamma(const Cplx& z);

// Contour offset from the pole for the shifted path, epsilon = rho / omega
// clamped to pi/4; rho defaults to max(8, Q) d.
Real contour_shift_epsilon(const IIntegralKey& key, const ScalarConfig& cfg);

QuadratureResult I_quadrature(const IIntegralKey& key, const ScalarConfig& cfg);

// Closed Beta form of I_{0,Q}^{1,C}:
//   2^{Q+iC} d^{-1} Gamma(b-a) Gamma(a) / Gamma(b),
//   a = (d(Q+1+iC) + i omega) / (2d),  b = Q+1+iC.
Cplx I_closed_beta(const Real& Q, const Real& C, const Real& omega, const Real& d);

// I_{n,Q} = -|l| omega i / (d (Q+iC|l|)) I_{n-1,Q-1} + (n-1)/(Q+iC|l|) I_{n-2,Q-2};
// the second base value is ignored when n = 1.
Cplx I_recurrence(const IIntegralKey& key, const Cplx& base_nm1_Qm1, const Cplx& base_nm2_Qm2);

// Leading term for l = 1: (2 pi / d)(omega/d)^{Q+iC} (-i)^n e^{-pi omega/(2d)}
// / Gamma(Q+1+iC). The caller owns the O((omega/d)^{Q-1} e^{-pi omega/(2d)})
// remainder.
Cplx I_asymptotic(int n, const Real& Q, const Real& C, const Real& omega, const Real& d);

// |value| <= K M^Q delta^{-Q} e^{-(3|l|/4) pi omega / (2d)} for |l| >= 2.
// delta defaults to 1/omega (the alpha = 1 normalization).
bool I_bound_check(const IIntegralKey& key, const Cplx& value, const Real& K, const Real& M,
                   Real delta = Real(0));

// Beta closed form at the base of the (n, Q) diagonal plus the recurrence on
// the way up: the l = 1 Gamma-series route for any admissible n.
Cplx I_series_route(int n, const Real& Q, const Real& C, const Real& omega, const Real& d);

}  // namespace hz
