#include "hz/special.hpp"

#include <boost/multiprecision/gmp.hpp>

#include <mutex>
#include <vector>

namespace hz {

namespace {

using Rational = boost::multiprecision::mpq_rational;

// Bernoulli numbers B_0, B_1, ... as exact rationals via the recurrence
// sum_{j=0}^{m} C(m+1, j) B_j = 0. Cached; grows on demand.
const Rational& bernoulli(std::size_t m) {
    static std::vector<Rational> cache{Rational(1), Rational(-1, 2)};
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    while (cache.size() <= m) {
        std::size_t k = cache.size();
        if (k % 2 == 1) {
            cache.emplace_back(0);
            continue;
        }
        Rational sum = 0;
        Rational binom = 1;  // C(k+1, j), starting at j = 0
        for (std::size_t j = 0; j < k; j++) {
            sum += binom * cache[j];
            binom *= Rational(static_cast<long>(k + 1 - j), static_cast<long>(j + 1));
        }
        cache.emplace_back(-sum / binom);  // binom is now C(k+1, k) = k+1
    }
    return cache[m];
}

Real bernoulli_real(std::size_t m) {
    const Rational& q = bernoulli(m);
    return Real(numerator(q).str()) / Real(denominator(q).str());
}

// log Gamma by the Stirling series, valid once Re z is large enough that the
// series bottoms out below the target accuracy. Terms are added while they
// decrease; the caller guarantees they reach the target before diverging.
Cplx log_gamma_stirling(const Cplx& z, const Real& eps, bool& converged) {
    Cplx lz = log(z);
    Cplx acc = (z - Cplx(Real(1) / 2)) * lz - z + Cplx(log(2 * pi()) / 2);
    Cplx zinv = Cplx(Real(1)) / z;
    Cplx zinv2 = zinv * zinv;
    Cplx power = zinv;  // z^{-(2k-1)}
    Real prev_mag{0};
    converged = false;
    for (int k = 1; k < 500; k++) {
        Real coeff = bernoulli_real(2 * k) / ((2 * k) * (2 * k - 1));
        Cplx term = power * coeff;
        Real mag = abs(term);
        if (k > 1 && mag >= prev_mag) break;  // asymptotic series started diverging
        acc += term;
        if (mag <= eps * abs(acc)) {
            converged = true;
            break;
        }
        prev_mag = mag;
        power *= zinv2;
    }
    return acc;
}

Cplx gamma_positive_half(const Cplx& z) {
    Real eps = ldexp(Real(1), -static_cast<long>(current_precision_bits()));
    // shift until Re z >= max(R, |Im z|) so |arg z| <= pi/4 and the Stirling
    // series bottoms out below eps (minimum term ~ e^{-2 pi Re z})
    Real R = Real(current_precision_bits() + 16) * log(Real(2)) / (2 * pi()) + 4;
    Real target = R > abs(z.im) ? R : abs(z.im);
    long shift = 0;
    if (z.re < target) {
        shift = static_cast<long>(std::ceil(static_cast<double>(target - z.re)));
    }
    Cplx zs = z + Cplx(Real(shift));
    bool converged = false;
    Cplx lg = log_gamma_stirling(zs, eps, converged);
    for (int grow = 0; !converged && grow < 4; grow++) {
        // enlarge the shift; only reachable in unusual precision regimes
        shift += static_cast<long>(std::ceil(static_cast<double>(R)));
        zs = z + Cplx(Real(shift));
        lg = log_gamma_stirling(zs, eps, converged);
    }
    if (!converged) throw accuracy_error("gamma: Stirling series did not converge", abs(lg));
    Cplx g = exp(lg);
    // Gamma(z) = Gamma(z + shift) / (z (z+1) ... (z+shift-1))
    Cplx prod(Real(1));
    for (long k = 0; k < shift; k++) prod *= z + Cplx(Real(k));
    return g / prod;
}

}  // namespace

Cplx gamma(const Cplx& zin) {
    Cplx z(to_working(zin.re), to_working(zin.im));
    if (z.im == 0 && z.re <= 0) {
        Real r = z.re;
        if (floor(r) == r) throw pole_error(static_cast<long>(r));
    }
    // reflection for the left half-plane: Gamma(z) Gamma(1-z) = pi / sin(pi z)
    if (z.re < Real(1) / 2) {
        Cplx one_minus = Cplx(Real(1)) - z;
        Cplx s = sin(Cplx(pi()) * z);
        return Cplx(pi()) / (s * gamma_positive_half(one_minus));
    }
    return gamma_positive_half(z);
}

Real contour_shift_epsilon(const IIntegralKey& key, const ScalarConfig& cfg) {
    Real rho = cfg.contour_shift_rho;
    if (rho == 0) {
        Real base = key.Q > 8 ? key.Q : Real(8);
        rho = base * key.d;
    }
    Real eps = rho / key.omega;
    Real cap = pi() / 4;
    return eps < cap ? eps : cap;
}

QuadratureResult I_quadrature(const IIntegralKey& key, const ScalarConfig& cfg) {
    key.validate();
    cfg.validate();
    PrecisionGuard guard(cfg.precision_bits + 32);
    const Real tol = to_working(cfg.quadrature_rel_tol);
    const Real Q = to_working(key.Q), C = to_working(key.C);
    const Real omega = to_working(key.omega), d = to_working(key.d);

    if (key.l == 0) {
        if (key.n % 2 == 1) return {Cplx(), Real(0), 0};  // odd integrand
        auto f = [&](const Real& t) -> Cplx {
            Real ch = cosh(d * t), sh = sinh(d * t);
            return Cplx(pow_int(sh, key.n) * pow(ch, -(Q + 1)));
        };
        return trapezoid_line(f, tol);
    }

    long absl = key.l < 0 ? -key.l : key.l;
    Real eps = to_working(contour_shift_epsilon(key, cfg));
    Real y = -(pi() / 2 - eps) / d;  // path s = t + i y, below the real axis
    Cplx expo = -(Cplx(Q + 1, C * absl));
    Real freq = omega * absl;
    auto f = [&](const Real& t) -> Cplx {
        Cplx s(t, y);
        Cplx ds = s * d;
        Cplx ch = cosh(ds);
        Cplx integrand = exp(expo * log(ch));  // principal log; Re cosh > 0 on the path
        if (key.n > 0) integrand *= pow_int(sinh(ds), key.n);
        // the constant magnitude e^{freq*y} is factored out below
        Real phase = -freq * t;
        return integrand * Cplx(cos(phase), sin(phase));
    };
    QuadratureResult res = trapezoid_line(f, tol);
    Real damp = exp(freq * y);
    res.value = res.value * damp;
    res.error_estimate *= damp;
    return res;
}

Cplx I_closed_beta(const Real& Q_in, const Real& C_in, const Real& omega_in,
                   const Real& d_in) {
    if (!(Q_in > 0)) throw std::invalid_argument("I_closed_beta: Q must be positive");
    const Real Q = to_working(Q_in), C = to_working(C_in);
    const Real omega = to_working(omega_in), d = to_working(d_in);
    Cplx b(Q + 1, C);
    Cplx a((d * (Q + 1) ) / (2 * d), (d * C + omega) / (2 * d));
    Cplx pref = exp(Cplx(Q, C) * Cplx(log(Real(2)))) / Cplx(d);
    return pref * gamma(b - a) * gamma(a) / gamma(b);
}

Cplx I_recurrence(const IIntegralKey& key, const Cplx& base_nm1_Qm1, const Cplx& base_nm2_Qm2) {
    key.validate();
    if (key.n < 1) throw std::invalid_argument("I_recurrence: n must be >= 1");
    if (key.l == 0) throw std::invalid_argument("I_recurrence: l must be nonzero");
    long absl = key.l < 0 ? -key.l : key.l;
    Cplx denom(key.Q, key.C * absl);
    if (abs(denom) == 0) throw std::domain_error("I_recurrence: Q + iC|l| = 0");
    Cplx first = Cplx(Real(0), -absl * key.omega / key.d) / denom * base_nm1_Qm1;
    if (key.n == 1) return first;
    return first + Cplx(Real(key.n - 1)) / denom * base_nm2_Qm2;
}

Cplx I_asymptotic(int n, const Real& Q_in, const Real& C_in, const Real& omega_in,
                  const Real& d_in) {
    const Real Q = to_working(Q_in), C = to_working(C_in);
    const Real omega = to_working(omega_in), d = to_working(d_in);
    Cplx power = exp(Cplx(Q, C) * Cplx(log(omega / d)));
    Cplx lead = Cplx(2 * pi() / d) * power * ipow(-n) * exp(Cplx(-pi() * omega / (2 * d)));
    return lead / gamma(Cplx(Q + 1, C));
}

bool I_bound_check(const IIntegralKey& key, const Cplx& value, const Real& K, const Real& M,
                   Real delta) {
    key.validate();
    long absl = key.l < 0 ? -key.l : key.l;
    if (absl < 2) throw std::invalid_argument("I_bound_check: requires |l| >= 2");
    if (delta == 0) delta = 1 / key.omega;
    Real bound = K * pow(M, key.Q) * pow(delta, -key.Q) *
                 exp(-(pi() * key.omega / (2 * key.d)) * (Real(3) * absl / 4));
    return abs(value) <= bound;
}

Cplx I_series_route(int n, const Real& Q, const Real& C, const Real& omega, const Real& d) {
    if (n == 0) return I_closed_beta(Q, C, omega, d);
    IIntegralKey key{n, Q, 1, C, omega, d};
    Cplx base1 = I_series_route(n - 1, Q - 1, C, omega, d);
    Cplx base2 = n >= 2 ? I_series_route(n - 2, Q - 2, C, omega, d) : Cplx();
    return I_recurrence(key, base1, base2);
}

}  // namespace hz
