#pragma once

// Quadrature engines for the integrals in this project. All integrands are
// analytic with exponential decay, which makes the plain trapezoidal rule on
// the (possibly shifted) line spectrally accurate; half-line integrals with a
// finite endpoint use composite Gauss-Legendre panels instead.

#include "hz/complex.hpp"
#include "hz/errors.hpp"
#include "hz/real.hpp"

#include <functional>
#include <map>
#include <mutex>
#include <vector>

namespace hz {

struct QuadratureResult {
    Cplx value;
    Real error_estimate;
    long evaluations = 0;
};

// Trapezoidal rule over the whole real line with automatic step halving and
// symmetric tail truncation. `decay_cut` controls when the tail is dropped:
// nodes with |f| below decay_cut * max|f| (with a safety run) end the sweep.
// Converges like exp(-2 pi a / h) for integrands analytic in a strip of
// half-width a, so the level loop terminates quickly.
inline QuadratureResult trapezoid_line(const std::function<Cplx(const Real&)>& f,
                                       const Real& rel_tol, Real h0 = Real(1) / 2,
                                       int max_level = 16) {
    long evals = 0;
    const Real tail_factor = rel_tol / 64;
    Real peak{0};

    auto sample = [&](const Real& t) {
        Cplx v = f(t);
        evals++;
        Real a = abs(v);
        if (a > peak) peak = a;
        return v;
    };

    std::map<long, Cplx> samples;  // index j -> f(j*h) at the current step h
    Real h = h0;
    samples[0] = sample(Real(0));

    // extend one side outward (indices beyond the current extent) until the
    // integrand stays below tail_factor * peak for a run of nodes
    auto extend_side = [&](std::map<long, Cplx>& out, const Real& step, int dir) {
        long j = dir > 0 ? out.rbegin()->first : out.begin()->first;
        int below = 0;
        // count trailing below-cut nodes already present on this side
        {
            long probe = j;
            while (probe != 0) {
                Real a = abs(out.at(probe));
                if (a <= tail_factor * peak) below++; else break;
                probe -= dir;
                if (below >= 6) break;
            }
        }
        for (long guard = 0; below < 6 && guard < 2000000; guard++) {
            j += dir;
            Cplx v = sample(j * step);
            out[j] = v;
            below = (abs(v) <= tail_factor * peak) ? below + 1 : 0;
        }
        if (below < 6) throw accuracy_error("trapezoid_line: tail did not decay", peak);
    };
    extend_side(samples, h, +1);
    extend_side(samples, h, -1);

    auto total = [&](const std::map<long, Cplx>& s, const Real& step) {
        Cplx acc;
        for (const auto& [j, v] : s) acc += v;
        return acc * step;
    };

    Cplx prev = total(samples, h);
    Real err = abs(prev);
    Real prev_err{0};
    for (int level = 1; level <= max_level; level++) {
        Real h2 = h / 2;
        std::map<long, Cplx> fine;
        for (const auto& [j, v] : samples) fine[2 * j] = v;
        long jmin = samples.begin()->first, jmax = samples.rbegin()->first;
        for (long j = jmin; j < jmax; j++) fine[2 * j + 1] = sample((2 * j + 1) * h2);
        extend_side(fine, h2, +1);
        extend_side(fine, h2, -1);
        samples = std::move(fine);
        h = h2;
        Cplx cur = total(samples, h);
        prev_err = err;
        err = abs(cur - prev);
        prev = cur;
        Real scale = abs(cur);
        if (scale == 0) scale = peak * h;  // zero integral of a nonzero function
        if (level >= 2 && err <= rel_tol * scale) return {cur, err, evals};
        // integrals cancelling to ~zero stall at the rounding floor: the
        // level-to-level gap stops halving while sitting far below the
        // integrand scale; accept with the achieved bound
        if (level >= 3 && err <= rel_tol * peak && err > prev_err / 2)
            return {cur, err, evals};
    }
    throw accuracy_error("trapezoid_line: tolerance not reached at max refinement level", err);
}

namespace detail {

struct GaussRule {
    std::vector<Real> nodes;    // on (-1, 1)
    std::vector<Real> weights;
};

// Gauss-Legendre nodes/weights at the current working precision via Newton on
// P_n from cos initial guesses. Cached per (n, decimal digits).
inline const GaussRule& gauss_rule(int n) {
    static std::map<std::pair<int, unsigned>, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(n, Real::default_precision());
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    Real pi_v = pi();
    for (int i = 0; i < (n + 1) / 2; i++) {
        Real x = cos(pi_v * (4 * i + 3) / (4 * n + 2));
        Real dp{0};
        for (int it2 = 0; it2 < 200; it2++) {
            // evaluate P_n and P_n' by the three-term recurrence
            Real p0 = 1, p1 = x;
            for (int k = 2; k <= n; k++) {
                Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            Real step = p1 / dp;
            x -= step;
            if (abs(step) <= ldexp(Real(1), -static_cast<long>(current_precision_bits()) + 4))
                break;
        }
        Real w = 2 / ((1 - x * x) * dp * dp);
        rule.nodes[i] = -x;  // ascending order
        rule.weights[i] = w;
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = w;
    }
    auto [pos, ok] = cache.emplace(key, std::move(rule));
    return pos->second;
}

}  // namespace detail

// Composite Gauss-Legendre over [a, b] with fixed panel length, then panel
// halving until two successive refinements agree to rel_tol (relative to the
// result, falling back to the integrand scale for cancelling integrals).
inline QuadratureResult gauss_panels(const std::function<Cplx(const Real&)>& f, const Real& a,
                                     const Real& b, Real panel_len, const Real& rel_tol,
                                     int nodes_per_panel = 24, int max_halvings = 10) {
    long evals = 0;
    const auto& rule = detail::gauss_rule(nodes_per_panel);
    Real peak{0};
    auto sweep = [&](const Real& plen) {
        Cplx acc;
        Real left = a;
        while (left < b) {
            Real right = left + plen < b ? left + plen : b;
            Real mid = (left + right) / 2, half = (right - left) / 2;
            for (int i = 0; i < nodes_per_panel; i++) {
                Cplx v = f(mid + half * rule.nodes[i]);
                evals++;
                Real m = abs(v);
                if (m > peak) peak = m;
                acc += v * (half * rule.weights[i]);
            }
            left = right;
        }
        return acc;
    };
    Cplx prev = sweep(panel_len);
    Real err = abs(prev);
    Real prev_err{0};
    for (int level = 1; level <= max_halvings; level++) {
        panel_len /= 2;
        Cplx cur = sweep(panel_len);
        prev_err = err;
        err = abs(cur - prev);
        prev = cur;
        Real scale = abs(cur) + peak * rel_tol * (b - a);
        if (err <= rel_tol * scale) return {cur, err, evals};
        if (level >= 2 && err <= rel_tol * peak && err > prev_err / 2)
            return {cur, err, evals};  // rounding floor of a cancelling integral
    }
    throw accuracy_error("gauss_panels: tolerance not reached", err);
}

// Variant for [a, b] whose integrand decays exponentially toward a: panels
// start at len_at_b next to b and grow geometrically toward a, so a long
// oscillatory tail costs only O(log) panels. Refinement halves len_at_b.
inline QuadratureResult gauss_panels_graded(const std::function<Cplx(const Real&)>& f,
                                            const Real& a, const Real& b, Real len_at_b,
                                            const Real& rel_tol, int nodes_per_panel = 24,
                                            int max_halvings = 10) {
    long evals = 0;
    const auto& rule = detail::gauss_rule(nodes_per_panel);
    const Real growth = Real(23) / 20;
    Real peak{0};
    auto sweep = [&](const Real& plen0) {
        Cplx acc;
        Real right = b;
        Real plen = plen0;
        while (right > a) {
            Real left = right - plen > a ? right - plen : a;
            Real mid = (left + right) / 2, half = (right - left) / 2;
            for (int i = 0; i < nodes_per_panel; i++) {
                Cplx v = f(mid + half * rule.nodes[i]);
                evals++;
                Real m = abs(v);
                if (m > peak) peak = m;
                acc += v * (half * rule.weights[i]);
            }
            right = left;
            plen *= growth;
        }
        return acc;
    };
    Cplx prev = sweep(len_at_b);
    Real err = abs(prev);
    Real prev_err{0};
    for (int level = 1; level <= max_halvings; level++) {
        len_at_b /= 2;
        Cplx cur = sweep(len_at_b);
        prev_err = err;
        err = abs(cur - prev);
        prev = cur;
        Real scale = abs(cur) + peak * rel_tol;
        if (err <= rel_tol * scale) return {cur, err, evals};
        if (level >= 2 && err <= rel_tol * peak && err > prev_err / 2)
            return {cur, err, evals};  // rounding floor of a cancelling integral
    }
    throw accuracy_error("gauss_panels_graded: tolerance not reached", err);
}

}  // namespace hz
