#include "hz/model.hpp"

#include <algorithm>

namespace hz {

namespace {

int max_degree(const std::vector<PerturbationSeries::Term>& terms) {
    int deg = 0;
    for (const auto& t : terms) deg = std::max({deg, t.k, t.m, t.n});
    return deg;
}

// sum_q delta^{p+q} c_qkmn x^k y^m z^n over a table
Real eval_table(const std::vector<PerturbationSeries::Term>& terms, const Real& delta,
                const Real& p, const Real& x, const Real& y, const Real& z) {
    if (terms.empty()) return Real(0);
    int deg = max_degree(terms);
    std::vector<Real> xp(deg + 1), yp(deg + 1), zp(deg + 1);
    xp[0] = yp[0] = zp[0] = 1;
    for (int i = 1; i <= deg; i++) {
        xp[i] = xp[i - 1] * x;
        yp[i] = yp[i - 1] * y;
        zp[i] = zp[i - 1] * z;
    }
    Real acc{0};
    for (const auto& t : terms)
        acc += t.coeff * pow(delta, p + t.q) * xp[t.k] * yp[t.m] * zp[t.n];
    return acc;
}

// partial derivative of the table at (x,y,z); axis 0,1,2 for x,y,z
Real eval_table_derivative(const std::vector<PerturbationSeries::Term>& terms, const Real& delta,
                           const Real& p, const Real& x, const Real& y, const Real& z, int axis) {
    Real acc{0};
    for (const auto& t : terms) {
        int e[3] = {t.k, t.m, t.n};
        if (e[axis] == 0) continue;
        Real c = t.coeff * e[axis] * pow(delta, p + t.q);
        e[axis] -= 1;
        acc += c * pow_int(x, e[0]) * pow_int(y, e[1]) * pow_int(z, e[2]);
    }
    return acc;
}

Real table_coeff(const std::vector<PerturbationSeries::Term>& terms, int q, int k, int m, int n) {
    Real acc{0};
    for (const auto& t : terms)
        if (t.q == q && t.k == k && t.m == m && t.n == n) acc += t.coeff;
    return acc;
}

}  // namespace

Vec3 eval_field_cartesian(const ModelSpec& spec, const PerturbationSeries& series,
                          const Params& params, const StateCartesian& s) {
    if (!is_finite(s.x) || !is_finite(s.y) || !is_finite(s.z))
        throw std::domain_error("eval_field_cartesian: non-finite state");
    Real rot = params.alpha / params.delta + spec.c * s.z;
    Real damp = params.sigma - spec.d * s.z;
    Vec3 v;
    v[0] = s.x * damp + rot * s.y + eval_table(series.f, params.delta, spec.p, s.x, s.y, s.z);
    v[1] = -rot * s.x + s.y * damp + eval_table(series.g, params.delta, spec.p, s.x, s.y, s.z);
    v[2] = -1 + spec.b * (s.x * s.x + s.y * s.y) + s.z * s.z +
           eval_table(series.h, params.delta, spec.p, s.x, s.y, s.z);
    return v;
}

Mat3 field_jacobian_cartesian(const ModelSpec& spec, const PerturbationSeries& series,
                              const Params& params, const StateCartesian& s) {
    Real rot = params.alpha / params.delta + spec.c * s.z;
    Real damp = params.sigma - spec.d * s.z;
    Mat3 j;
    j[0] = {damp, rot, -spec.d * s.x + spec.c * s.y};
    j[1] = {-rot, damp, -spec.d * s.y - spec.c * s.x};
    j[2] = {2 * spec.b * s.x, 2 * spec.b * s.y, 2 * s.z};
    const std::vector<PerturbationSeries::Term>* tables[3] = {&series.f, &series.g, &series.h};
    for (int row = 0; row < 3; row++)
        for (int axis = 0; axis < 3; axis++)
            j[row][axis] += eval_table_derivative(*tables[row], params.delta, spec.p, s.x, s.y,
                                                  s.z, axis);
    return j;
}

CylindricVelocity eval_field_cylindric(const ModelSpec& spec, const PerturbationSeries& series,
                                       const Params& params, const StateCylindric& s) {
    if (!(s.r > 0)) throw std::domain_error("eval_field_cylindric: r must be positive");
    Real rho = sqrt(2 * s.r);
    Real cth = cos(s.theta), sth = sin(s.theta);
    Real x = rho * cth, y = rho * sth;
    Real fv = eval_table(series.f, params.delta, spec.p, x, y, s.z);
    Real gv = eval_table(series.g, params.delta, spec.p, x, y, s.z);
    Real hv = eval_table(series.h, params.delta, spec.p, x, y, s.z);
    CylindricVelocity out;
    out.F = rho * (cth * fv + sth * gv);
    out.G = (-sth * fv + cth * gv) / rho;
    out.H = hv;
    out.dr = 2 * s.r * (params.sigma - spec.d * s.z) + out.F;
    out.dtheta = -params.alpha / params.delta - spec.c * s.z + out.G;
    out.dz = -1 + 2 * spec.b * s.r + s.z * s.z + out.H;
    return out;
}

Heteroclinic heteroclinic(const ModelSpec& spec, const Params& params, const Real& u,
                          const Real& theta0) {
    if (!is_finite(u)) throw std::domain_error("heteroclinic: non-finite u");
    Real du = spec.d * u;
    Heteroclinic h;
    h.R0 = (spec.d + 1) / (2 * spec.b * cosh(du) * cosh(du));
    h.Theta0 = theta0 - params.alpha / params.delta * u - spec.c / spec.d * log(cosh(du));
    h.Z0 = tanh(du);
    return h;
}

namespace {

CriticalPoint newton_critical_point(const ModelSpec& spec, const PerturbationSeries& series,
                                    const Params& params, const StateCartesian& seed,
                                    const Real& tol) {
    StateCartesian s = seed;
    Vec3 res = eval_field_cartesian(spec, series, params, s);
    Real res_norm = norm_inf(res);
    const int max_iter = 50;
    for (int it = 0; it < max_iter && res_norm > tol; it++) {
        Mat3 j = field_jacobian_cartesian(spec, series, params, s);
        Vec3 step = solve3(j, res);
        Real lambda = 1;
        for (int damp = 0; damp < 30; damp++) {
            StateCartesian trial{s.x - lambda * step[0], s.y - lambda * step[1],
                                 s.z - lambda * step[2]};
            Vec3 r2 = eval_field_cartesian(spec, series, params, trial);
            Real n2 = norm_inf(r2);
            if (n2 < res_norm || damp == 29) {
                s = trial;
                res = r2;
                res_norm = n2;
                break;
            }
            lambda /= 2;
        }
    }
    if (res_norm > tol)
        throw convergence_error("critical_points: Newton did not reach tolerance", res_norm);
    CriticalPoint out;
    out.point = s;
    out.residual = res;
    out.jacobian = field_jacobian_cartesian(spec, series, params, s);
    out.eigen = eigen_saddle_focus(out.jacobian);
    out.distance_to_unperturbed =
        norm2(Vec3{s.x - seed.x, s.y - seed.y, s.z - seed.z});
    // guards against Newton drifting to a root far from the seed equilibrium;
    // the delta^{p+4} displacement of the shifted frame is checked by tests,
    // not here, since admissible systems at sigma ~ delta^{p+3} sit at
    // distance O(delta^{p+3})
    if (out.distance_to_unperturbed > Real(1) / 10)
        throw convergence_error("critical_points: converged far from the unperturbed equilibrium",
                                out.distance_to_unperturbed);
    return out;
}

}  // namespace

CriticalPoints critical_points(const ModelSpec& spec, const PerturbationSeries& series,
                               const Params& params, const Real& tol) {
    CriticalPoints out;
    out.s_minus = newton_critical_point(spec, series, params, {Real(0), Real(0), Real(-1)}, tol);
    out.s_plus = newton_critical_point(spec, series, params, {Real(0), Real(0), Real(1)}, tol);
    return out;
}

Real forcing_F0(const ModelSpec& spec, const PerturbationSeries& series, const Params& params,
                const Real& u, const Real& theta) {
    Heteroclinic het = heteroclinic(spec, params, u, Real(0));
    Real rho = sqrt(2 * het.R0);
    Real x = rho * cos(theta), y = rho * sin(theta);
    Real fv = eval_table(series.f, params.delta, spec.p, x, y, het.Z0);
    Real gv = eval_table(series.g, params.delta, spec.p, x, y, het.Z0);
    Real hv = eval_table(series.h, params.delta, spec.p, x, y, het.Z0);
    Real F0 = rho * (cos(theta) * fv + sin(theta) * gv);
    return 2 * params.sigma * het.R0 + F0 + (spec.d + 1) / spec.b * het.Z0 * hv;
}

std::vector<ForcingModeTerm> forcing_mode_terms(const ModelSpec& spec,
                                                const PerturbationSeries& series,
                                                const Params& params, long l) {
    std::vector<ForcingModeTerm> out;
    Real A = sqrt((spec.d + 1) / spec.b);
    if (l == 0 && params.sigma != 0) {
        // 2 sigma R0 = sigma (d+1)/b sech^2(d u)
        out.push_back({Cplx(to_working(params.sigma * (spec.d + 1) / spec.b)), 2, 0});
    }
    auto add = [&](const PerturbationSeries::Term& t, int a_k, int a_m, int extra_A,
                   int extra_tanh) {
        Cplx a = trig_monomial_mode(a_k, a_m, l);
        if (a.re == 0 && a.im == 0) return;
        Real scale = pow(params.delta, spec.p + t.q) * pow_int(A, t.k + t.m + extra_A);
        Cplx coeff = a * (t.coeff * scale);
        out.push_back({Cplx(to_working(coeff.re), to_working(coeff.im)),
                       t.k + t.m + (extra_A == 1 ? 1 : 0), t.n + extra_tanh});
    };
    // F(0) = sqrt(2 R0) [cos(theta) f + sin(theta) g]: one extra sech and one
    // extra angular factor per part
    for (const auto& t : series.f) add(t, t.k + 1, t.m, 1, 0);
    for (const auto& t : series.g) add(t, t.k, t.m + 1, 1, 0);
    // (d+1)/b Z0 H(0): two extra powers of A, one extra tanh, no extra sech
    for (const auto& t : series.h) add(t, t.k, t.m, 2, 1);
    return out;
}

FourierSeries forcing_F0_fourier(const ModelSpec& spec, const PerturbationSeries& series,
                                 const Params& params, const Real& u, long max_mode) {
    if (max_mode < 0) throw std::invalid_argument("forcing_F0_fourier: max_mode must be >= 0");
    FourierSeries out;
    out.cutoff = max_mode;
    Real du = spec.d * u;
    Real sech_u = 1 / cosh(du), tanh_u = tanh(du);
    for (long l = -max_mode; l <= max_mode; l++) {
        Cplx acc;
        for (const auto& term : forcing_mode_terms(spec, series, params, l))
            acc += term.coeff * pow_int(sech_u, term.sech_pow) * pow_int(tanh_u, term.tanh_pow);
        out.modes[l] = acc;
    }
    return out;
}

Real L0_constant(const ModelSpec& spec, const PerturbationSeries& series) {
    Real h3003 = table_coeff(series.h, 3, 0, 0, 3);
    if (spec.conservative) return -h3003;
    Real f3120 = table_coeff(series.f, 3, 1, 2, 0);
    Real g3210 = table_coeff(series.g, 3, 2, 1, 0);
    Real f3300 = table_coeff(series.f, 3, 3, 0, 0);
    Real g3030 = table_coeff(series.g, 3, 0, 3, 0);
    Real f3102 = table_coeff(series.f, 3, 1, 0, 2);
    Real g3012 = table_coeff(series.g, 3, 0, 1, 2);
    Real h3201 = table_coeff(series.h, 3, 2, 0, 1);
    Real h3021 = table_coeff(series.h, 3, 0, 2, 1);
    const Real& b = spec.b;
    const Real& d = spec.d;
    Real rho0 = (d + 1) / (2 * b * d * (3 * d + 2)) *
                ((d + 1) / (4 * b) * (f3120 + g3210 + 3 * f3300 + 3 * g3030) - (f3102 + g3012) -
                 (d + 1) / b * (h3201 + h3021) + 2 * h3003);
    Real H0 = -h3003 + (d + 1) / (2 * b) * (h3021 + h3201);
    return -2 * b / d * rho0 - H0 / d;
}

std::map<std::array<int, 4>, Real> divergence_coefficients(const PerturbationSeries& series,
                                                           int degree) {
    std::map<std::array<int, 4>, Real> div;
    auto accumulate = [&](const std::vector<PerturbationSeries::Term>& terms, int axis) {
        for (const auto& t : terms) {
            if (t.q > degree) continue;
            int e[3] = {t.k, t.m, t.n};
            if (e[axis] == 0) continue;
            Real c = t.coeff * e[axis];
            e[axis] -= 1;
            std::array<int, 4> key{t.q, e[0], e[1], e[2]};
            auto [it, inserted] = div.try_emplace(key, c);
            if (!inserted) it->second += c;
        }
    };
    accumulate(series.f, 0);
    accumulate(series.g, 1);
    accumulate(series.h, 2);
    for (auto it = div.begin(); it != div.end();)
        it = (it->second == 0) ? div.erase(it) : std::next(it);
    return div;
}

Real divergence_check(const PerturbationSeries& series, int degree) {
    Real worst{0};
    for (const auto& [key, c] : divergence_coefficients(series, degree))
        worst = std::max(worst, abs(c));
    return worst;
}

UnfoldingScaling scale_from_unfolding(const ModelSpec& spec, const Real& mu, const Real& nu,
                                      const Real& q) {
    if (!(mu > 0)) throw std::domain_error("scale_from_unfolding: mu must be positive");
    if (!(abs(nu) < spec.d * sqrt(mu)))
        throw std::domain_error("scale_from_unfolding: (mu,nu) outside the unfolding region U");
    UnfoldingScaling out;
    out.delta = sqrt(mu);
    out.sigma = nu / out.delta;
    out.p = q - 2;
    out.z_shift = pow(out.delta, out.p + 3) * spec.h3 / 2;
    return out;
}

}  // namespace hz
