#include "hz/melnikov.hpp"

#include <algorithm>

namespace hz {

namespace {

// largest sech power appearing in the mode terms; the integrand of every
// Melnikov-type integral decays like e^{-(d min_sech + 2)|w|}
int min_sech_power(const std::vector<ForcingModeTerm>& terms) {
    int s = 1000;
    for (const auto& t : terms) s = std::min(s, t.sech_pow);
    return s == 1000 ? 0 : s;
}

int max_sech_tanh_power(const std::vector<ForcingModeTerm>& terms) {
    int s = 0;
    for (const auto& t : terms) s = std::max(s, t.sech_pow + t.tanh_pow);
    return s;
}

Cplx eval_mode_terms(const std::vector<ForcingModeTerm>& terms, const Cplx& sech,
                     const Cplx& tanh_v) {
    Cplx acc;
    for (const auto& t : terms)
        acc += t.coeff * pow_int(sech, t.sech_pow) * pow_int(tanh_v, t.tanh_pow);
    return acc;
}

Real real_mode_terms(const std::vector<ForcingModeTerm>& terms, const Real& sech,
                     const Real& tanh_v) {
    // used where the mode-0 terms are known to be real
    Cplx acc = eval_mode_terms(terms, Cplx(sech), Cplx(tanh_v));
    return acc.re;
}

}  // namespace

Real melnikov_phase(const ModelSpec& spec, const Params& params, const Real& w) {
    Real aod = to_working(params.alpha / params.delta);
    Real cod = to_working(spec.c / spec.d);
    Real d = to_working(spec.d);
    return aod * w + cod * log(cosh(d * w));
}

long forcing_mode_cutoff(const PerturbationSeries& series) {
    long cutoff = 0;
    for (const auto& t : series.f) cutoff = std::max<long>(cutoff, t.k + t.m + 1);
    for (const auto& t : series.g) cutoff = std::max<long>(cutoff, t.k + t.m + 1);
    for (const auto& t : series.h) cutoff = std::max<long>(cutoff, t.k + t.m);
    return cutoff;
}

Real melnikov_pointwise(const ModelSpec& spec, const PerturbationSeries& series,
                        const Params& params, const Real& u, const Real& theta,
                        const ScalarConfig& cfg) {
    cfg.validate();
    if (series.empty() && params.sigma == 0) return Real(0);
    PrecisionGuard guard(cfg.precision_bits + 32);
    Real u_w = to_working(u), theta_w = to_working(theta);
    Real d = to_working(spec.d);
    Real two_over_d = to_working(2 / spec.d);
    Real phase_u = melnikov_phase(spec, params, u_w);
    auto f = [&](const Real& w) -> Cplx {
        Real angle = theta_w - (melnikov_phase(spec, params, w) - phase_u);
        Real kernel = pow(cosh(d * w), -two_over_d);
        return Cplx(forcing_F0(spec, series, params, w, angle) * kernel);
    };
    QuadratureResult res = trapezoid_line(f, to_working(cfg.quadrature_rel_tol));
    return res.value.re * pow(cosh(d * u_w), two_over_d);
}

QuadratureResult upsilon0_quadrature(const ModelSpec& spec, const PerturbationSeries& series,
                                     const Params& params, long l, const ScalarConfig& cfg) {
    cfg.validate();
    PrecisionGuard guard(cfg.precision_bits + 32);
    auto terms = forcing_mode_terms(spec, series, params, l);
    if (terms.empty()) return {Cplx(), Real(0), 0};
    const Real tol = to_working(cfg.quadrature_rel_tol);
    const Real d = to_working(spec.d);
    Real two_over_d = to_working(2 / spec.d);

    if (l == 0) {
        auto f = [&](const Real& w) -> Cplx {
            Real ch = cosh(d * w);
            Real sech = 1 / ch, th = tanh(d * w);
            return eval_mode_terms(terms, Cplx(sech), Cplx(th)) * pow(ch, -two_over_d);
        };
        return trapezoid_line(f, tol);
    }

    // shifted contour w = t + i y with y on the decaying side of e^{-il alpha w/delta}
    Real rho = to_working(cfg.contour_shift_rho);
    if (rho == 0) {
        Real q_eff = Real(max_sech_tanh_power(terms)) + two_over_d;
        rho = (q_eff > 8 ? q_eff : Real(8)) * d;
    }
    Real eps_w = to_working(rho * params.delta / d);
    Real cap = pi() / (4 * d);
    if (eps_w > cap) eps_w = cap;
    Real y = (l > 0 ? Real(-1) : Real(1)) * (pi() / (2 * d) - eps_w);

    long absl = l < 0 ? -l : l;
    Real freq = to_working(params.alpha / params.delta * l);
    Cplx kernel_expo(-two_over_d, to_working(-(spec.c / d) * l));  // cosh^{-2/d} e^{-il c/d log cosh}
    auto f = [&](const Real& t) -> Cplx {
        Cplx w(t, y);
        Cplx dw = w * d;
        Cplx log_ch = log(cosh(dw));  // principal branch; Re cosh > 0 on the path
        Cplx sech = exp(-log_ch);
        Cplx th = sinh(dw) * sech;
        Cplx val = eval_mode_terms(terms, sech, th) * exp(kernel_expo * log_ch);
        Real ph = -freq * t;
        return val * Cplx(cos(ph), sin(ph));
    };
    QuadratureResult res = trapezoid_line(f, tol);
    // restore the constant magnitude e^{l alpha y / delta} = e^{-|l| alpha (pi/2d - eps)/delta}
    Real damp = exp(-to_working(absl * params.alpha / params.delta) * (pi() / (2 * d) - eps_w));
    res.value = res.value * damp;
    res.error_estimate *= damp;
    return res;
}

Cplx upsilon0_gamma_series(const ModelSpec& spec, const PerturbationSeries& series,
                           const Params& params, long l, const ScalarConfig& cfg) {
    if (l != 1 && l != -1)
        throw std::invalid_argument("upsilon0_gamma_series: defined for l = +1 or -1");
    cfg.validate();
    PrecisionGuard guard(cfg.precision_bits + 32);
    Real A = sqrt((spec.d + 1) / spec.b);
    Real omega = params.alpha / params.delta;
    Real C = spec.c / spec.d;
    Real two_over_d = 2 / spec.d;
    Cplx acc;
    auto add = [&](const PerturbationSeries::Term& t, int a_k, int a_m, int extra_A,
                   int sinh_extra) {
        Cplx a = trig_monomial_mode(a_k, a_m, l);
        if (a.re == 0 && a.im == 0) return;
        Real scale = pow(params.delta, spec.p + t.q) * pow_int(A, t.k + t.m + extra_A);
        Cplx I = I_series_route(t.n + sinh_extra, Real(t.k + t.m + t.n) + two_over_d, C, omega,
                             spec.d);
        if (l < 0) I = conj(I);  // the l = -1 integral conjugates the integrand
        acc += a * (t.coeff * scale) * I;
    };
    for (const auto& t : series.f) add(t, t.k + 1, t.m, 1, 0);
    for (const auto& t : series.g) add(t, t.k, t.m + 1, 1, 0);
    for (const auto& t : series.h) add(t, t.k, t.m, 2, 1);
    return acc;
}

MelnikovResult melnikov_coefficients(const ModelSpec& spec, const PerturbationSeries& series,
                                     const Params& params, long max_mode, const ScalarConfig& cfg,
                                     UpsilonRoute route) {
    MelnikovResult out;
    out.route = route;
    out.delta = params.delta;
    out.sigma = params.sigma;
    out.upsilon0.cutoff = max_mode;
    if (route == UpsilonRoute::gamma_series) {
        for (long l : {-1L, 1L}) {
            Cplx v = upsilon0_gamma_series(spec, series, params, l, cfg);
            out.upsilon0.modes[l] = v;
            out.error_estimate[l] = abs(v) * ldexp(Real(1), -static_cast<long>(cfg.precision_bits) + 24);
        }
        auto avg = upsilon0_quadrature(spec, series, params, 0, cfg);
        out.upsilon0.modes[0] = avg.value;
        out.error_estimate[0] = avg.error_estimate;
        return out;
    }
    for (long l = -max_mode; l <= max_mode; l++) {
        auto res = upsilon0_quadrature(spec, series, params, l, cfg);
        out.upsilon0.modes[l] = res.value;
        out.error_estimate[l] = res.error_estimate;
    }
    // magnitude of the first discarded harmonic
    auto next = upsilon0_quadrature(spec, series, params, max_mode + 1, cfg);
    out.upsilon0.tail_bound = abs(next.value);
    return out;
}

BorelConstant borel_constant(const ModelSpec& spec, const PerturbationSeries& series,
                             const ScalarConfig& cfg) {
    cfg.validate();
    PrecisionGuard guard(cfg.precision_bits + 32);
    Real A = sqrt((spec.d + 1) / spec.b);
    Real zeta = spec.alpha0 / spec.d;  // the delta -> 0 frequency
    Real log_zeta = log(zeta);
    Real two_over_d = 2 / spec.d;
    Real C_exp = spec.c / spec.d;
    Cplx mhat;
    long used = 0;
    // only the delta-free monomials k+m+n = q of the tables survive in m(w,theta)
    auto add = [&](const PerturbationSeries::Term& t, int a_k, int a_m, const Cplx& prefactor) {
        if (t.k + t.m + t.n != t.q) return;
        Cplx a = trig_monomial_mode(a_k, a_m, 1);
        if (a.re == 0 && a.im == 0) return;
        // Borel rule: w^{q+1+2/d+ic/d} -> zeta^{q+2/d+ic/d} / Gamma(q+1+2/d+ic/d)
        Cplx zeta_pow = exp(Cplx(Real(t.q) + two_over_d, C_exp) * Cplx(log_zeta));
        Cplx denom = gamma(Cplx(Real(t.q + 1) + two_over_d, C_exp));
        Cplx zn = ipow(-t.n);  // (-i)^n from the z = -i w substitution
        mhat += prefactor * a * zn * t.coeff * pow_int(A, t.k + t.m) * zeta_pow / denom;
        used++;
    };
    for (const auto& t : series.f) add(t, t.k + 1, t.m, Cplx(A));
    for (const auto& t : series.g) add(t, t.k, t.m + 1, Cplx(A));
    for (const auto& t : series.h) add(t, t.k, t.m, Cplx(Real(0), -A * A));  // -i A^2
    BorelConstant out;
    out.mhat1_at_alpha_over_d = mhat;
    Cplx Cval = Cplx(4 * pi() / spec.d) * mhat;
    out.C1 = Cval.re;
    out.C2 = -Cval.im;
    out.series_terms_used = used;
    out.truncation_bound = Real(0);
    return out;
}

Cplx upsilon1_asymptotic_value(const ModelSpec& spec, const Params& params,
                               const BorelConstant& borel) {
    Real log_delta = log(params.delta);
    Cplx delta_pow = exp(Cplx(spec.p - 2 / spec.d, -spec.c / spec.d) * Cplx(log_delta));
    Real expo = exp(-params.alpha * pi() / (2 * spec.d * params.delta));
    return delta_pow * expo * borel.C() / Real(2);
}

Real melnikov_asymptotic(const ModelSpec& spec, const PerturbationSeries& series,
                         const Params& params, const Real& u, const Real& theta,
                         const ScalarConfig& cfg) {
    BorelConstant borel = borel_constant(spec, series, cfg);
    Cplx avg = upsilon0_quadrature(spec, series, params, 0, cfg).value;
    Real du = spec.d * u;
    Real vartheta = params.alpha / params.delta * u +
                    spec.c / spec.d * (log(cosh(du)) - log(params.delta));
    Real osc = pow(params.delta, spec.p - 2 / spec.d) *
               exp(-params.alpha * pi() / (2 * spec.d * params.delta)) *
               (borel.C1 * cos(theta + vartheta) + borel.C2 * sin(theta + vartheta));
    return pow(cosh(du), 2 / spec.d) * (avg.re + osc);
}

AverageIJ average_IJ(const ModelSpec& spec, const PerturbationSeries& series,
                     const Params& params, const ScalarConfig& cfg) {
    cfg.validate();
    PrecisionGuard guard(cfg.precision_bits + 32);
    AverageIJ out;
    // I = (d+1)/b int sech^{2/d+2}(d w) dw = (d+1)/(b d) sqrt(pi)
    //     Gamma(1/d + 1) / Gamma(1/d + 3/2)
    Real inv_d = 1 / spec.d;
    out.I = (spec.d + 1) / (spec.b * spec.d) * sqrt(pi()) * tgamma(inv_d + 1) /
            tgamma(inv_d + Real(3) / 2);
    // J: mode-0 forcing without the sigma term, scaled by delta^{-3-p}
    Params p0 = params;
    p0.sigma = 0;
    auto terms = forcing_mode_terms(spec, series, p0, 0);
    if (terms.empty()) {
        out.J = 0;
        return out;
    }
    Real two_over_d = to_working(2 / spec.d);
    Real d = to_working(spec.d);
    auto f = [&](const Real& w) -> Cplx {
        Real ch = cosh(d * w);
        return Cplx(real_mode_terms(terms, 1 / ch, tanh(d * w)) * pow(ch, -two_over_d));
    };
    QuadratureResult res = trapezoid_line(f, to_working(cfg.quadrature_rel_tol));
    out.J = res.value.re * pow(params.delta, -3 - spec.p);
    return out;
}

Real sigma_star(const ModelSpec& spec, const PerturbationSeries& series, const Real& delta,
                const ScalarConfig& cfg) {
    if (spec.conservative)
        throw std::invalid_argument("sigma_star: conservative systems have sigma = 0");
    PrecisionGuard guard(cfg.precision_bits + 32);
    Params probe = Params::make(spec, delta, Real(0));
    AverageIJ ij = average_IJ(spec, series, probe, cfg);
    if (ij.I == 0) throw std::domain_error("sigma_star: I = 0");
    Real dp3 = pow(delta, spec.p + 3);
    Real sigma = -(ij.J / ij.I) * dp3;
    Real scale = abs(sigma) * ij.I + dp3 * abs(ij.J) + dp3 * ldexp(Real(1), -60);
    Real tol = 4 * cfg.quadrature_rel_tol * scale;
    // Upsilon_0^(0) is affine in sigma (sigma I + delta^{p+3} J up to
    // quadrature error), so Newton steps with the exact slope I converge at
    // once; the loop absorbs quadrature noise
    for (int it = 0; it < 8; it++) {
        Real r = upsilon0_quadrature(spec, series, Params::make(spec, delta, sigma), 0, cfg)
                     .value.re;
        if (abs(r) <= tol) return sigma;
        sigma -= r / ij.I;
    }
    Real resid = upsilon0_quadrature(spec, series, Params::make(spec, delta, sigma), 0, cfg)
                     .value.re;
    if (abs(resid) <= tol) return sigma;
    throw convergence_error("sigma_star: root refinement stalled", resid);
}

std::map<long, Cplx> r10_mode_integrals(const ModelSpec& spec, const PerturbationSeries& series,
                                        const Params& params, ManifoldBranch branch,
                                        const Real& u, long max_mode, const ScalarConfig& cfg) {
    cfg.validate();
    PrecisionGuard guard(cfg.precision_bits + 32);
    std::map<long, Cplx> out;
    const Real tol = to_working(cfg.quadrature_rel_tol);
    const Real u_w = to_working(u);
    Real d = to_working(spec.d);
    Real two_over_d = to_working(2 / spec.d);
    Real omega = to_working(params.alpha / params.delta);
    for (long l = 0; l <= max_mode; l++) {
        auto terms = forcing_mode_terms(spec, series, params, l);
        if (terms.empty()) {
            out[l] = Cplx();
            if (l > 0) out[-l] = Cplx();
            continue;
        }
        Real rate = d * min_sech_power(terms) + 2;  // decay of the integrand
        Real range = (Real(static_cast<long>(cfg.precision_bits)) * log(Real(2)) / 2 + 40) / rate;
        auto integrand = [&](const Real& w) -> Cplx {
            Real ch = cosh(d * w);
            Real sech = 1 / ch, th = tanh(d * w);
            Cplx val = eval_mode_terms(terms, Cplx(sech), Cplx(th)) * pow(ch, -two_over_d);
            if (l == 0) return val;
            Real ph = -l * melnikov_phase(spec, params, w);
            return val * Cplx(cos(ph), sin(ph));
        };
        Real len0 = 1 / (1 + l * omega / 6);
        QuadratureResult res;
        if (branch == ManifoldBranch::unstable) {
            res = gauss_panels_graded(integrand, u_w - range, u_w, len0, tol);
        } else {
            // int_{+inf}^{u} f = -int_u^{B} f; mirror so the decay points at the
            // graded end
            Real B = u_w + range;
            auto mirrored = [&](const Real& t) { return integrand(u_w + B - t); };
            res = gauss_panels_graded(mirrored, u_w, B, len0, tol);
            res.value = -res.value;
        }
        out[l] = res.value;
        if (l > 0) out[-l] = conj(res.value);
    }
    return out;
}

Real melnikov_from_modes(const ModelSpec& spec, const Params& params, const FourierSeries& ups,
                         const Real& u, const Real& theta) {
    Real phase_u = melnikov_phase(spec, params, u);
    Cplx acc;
    for (const auto& [l, c] : ups.modes) {
        Real a = l * (theta + phase_u);
        acc += c * Cplx(cos(a), sin(a));
    }
    return acc.re * pow(cosh(spec.d * u), 2 / spec.d);
}

Real r10_graph(const ModelSpec& spec, const PerturbationSeries& series, const Params& params,
               ManifoldBranch branch, const Real& u, const Real& theta, const ScalarConfig& cfg) {
    long cutoff = forcing_mode_cutoff(series);
    auto K = r10_mode_integrals(spec, series, params, branch, u, cutoff, cfg);
    FourierSeries fs;
    fs.cutoff = cutoff;
    fs.modes = std::move(K);
    return melnikov_from_modes(spec, params, fs, u, theta);
}

}  // namespace hz
