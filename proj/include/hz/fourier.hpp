#pragma once

// Finite Fourier data in the angle theta: the carrier for Melnikov
// coefficients and measured splitting modes, plus the exact mode tables of
// the trigonometric monomials cos^k(theta) sin^m(theta).

#include "hz/complex.hpp"
#include "hz/real.hpp"

#include <map>
#include <stdexcept>
#include <vector>

namespace hz {

struct FourierSeries {
    std::map<long, Cplx> modes;  // l -> coefficient, |l| <= cutoff
    long cutoff = 0;
    Real tail_bound{0};          // estimated magnitude of discarded modes

    const Cplx& mode(long l) const {
        static const Cplx zero{};
        auto it = modes.find(l);
        return it == modes.end() ? zero : it->second;
    }
    void set_mode(long l, Cplx v) {
        modes[l] = std::move(v);
        if (std::abs(l) > cutoff) cutoff = std::abs(l);
    }

    // evaluate sum_l mode(l) e^{i l theta}
    Cplx eval(const Real& theta) const {
        Cplx acc;
        for (const auto& [l, c] : modes) {
            Real a = l * theta;
            acc += c * Cplx(cos(a), sin(a));
        }
        return acc;
    }

    // max |mode(-l) - conj(mode(l))| over stored modes
    Real reality_defect() const {
        Real worst{0};
        for (const auto& [l, c] : modes) {
            if (l < 0) continue;
            Real d = abs(mode(-l) - conj(c));
            if (d > worst) worst = d;
        }
        return worst;
    }
};

// l-th Fourier coefficient of cos^k(theta) sin^m(theta), exact:
//   cos^k = 2^-k sum_j C(k,j) e^{i(2j-k)theta}
//   sin^m = (2i)^-m sum_r C(m,r) (-1)^{m-r} e^{i(2r-m)theta}
inline Cplx trig_monomial_mode(int k, int m, long l) {
    if (k < 0 || m < 0) throw std::invalid_argument("trig_monomial_mode: negative exponent");
    // parity: modes with (k+m) - |l| odd vanish
    if (((k + m) - l) % 2 != 0) return Cplx();
    std::vector<Real> binom_k(k + 1), binom_m(m + 1);
    binom_k[0] = 1;
    for (int j = 1; j <= k; j++) binom_k[j] = binom_k[j - 1] * (k - j + 1) / j;
    binom_m[0] = 1;
    for (int r = 1; r <= m; r++) binom_m[r] = binom_m[r - 1] * (m - r + 1) / r;
    Real sum{0};
    for (int j = 0; j <= k; j++) {
        long need = l - (2 * j - k);  // 2r - m == need
        if ((need + m) % 2 != 0) continue;
        long r = (need + m) / 2;
        if (r < 0 || r > m) continue;
        Real term = binom_k[j] * binom_m[r];
        if ((m - r) % 2 != 0) term = -term;
        sum += term;
    }
    // prefactor 2^-(k+m) i^-m = 2^-(k+m) (-i)^m
    Cplx pref = ipow(-m) * ldexp(Real(1), -(k + m));
    return pref * sum;
}

// Plain DFT of n equispaced samples theta_j = 2 pi j / n; returns modes
// -L..L with L = n/2 - 1 (n small here, direct summation is exact enough).
inline FourierSeries dft_modes(const std::vector<Real>& samples, long max_mode) {
    long n = static_cast<long>(samples.size());
    if (n < 2) throw std::invalid_argument("dft_modes: need at least 2 samples");
    if (max_mode > n / 2) throw std::invalid_argument("dft_modes: cutoff above Nyquist");
    FourierSeries out;
    out.cutoff = max_mode;
    Real two_pi = 2 * pi();
    for (long l = -max_mode; l <= max_mode; l++) {
        Cplx acc;
        for (long j = 0; j < n; j++) {
            Real a = -(two_pi * l * j) / n;
            acc += Cplx(samples[j] * cos(a), samples[j] * sin(a));
        }
        out.modes[l] = acc / Real(n);
    }
    return out;
}

}  // namespace hz
