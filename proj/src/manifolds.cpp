#include "hz/manifolds.hpp"

#include "hz/errors.hpp"

#include <algorithm>

namespace hz {

namespace {

Real wrap_two_pi(Real a) {
    Real two_pi = 2 * pi();
    a = fmod(a, two_pi);
    if (a < 0) a += two_pi;
    return a;
}

// principal value in (-pi, pi]
Real wrap_pm_pi(Real a) {
    Real two_pi = 2 * pi();
    a = fmod(a, two_pi);
    if (a > pi()) a -= two_pi;
    if (a <= -pi()) a += two_pi;
    return a;
}

// symmetric bilinear form of the quadratic field terms at a point:
// B_c(u, w) = 1/2 u^T Hess(F_c) w
struct QuadraticForm {
    Mat3 hess[3];  // hess[c][a][b]

    QuadraticForm(const PolyField3& field, const Vec3& at) {
        for (int a = 0; a < 3; a++) {
            PolyField3 da = field.derivative(a);
            for (int b = 0; b < 3; b++) {
                PolyField3 dab = da.derivative(b);
                for (int c = 0; c < 3; c++) {
                    Real acc{0};
                    for (const auto& m : dab.comp[c])
                        acc += m.coeff * pow_int(at[0], m.kx) * pow_int(at[1], m.ky) *
                               pow_int(at[2], m.kz);
                    hess[c][a][b] = acc;
                }
            }
        }
    }

    CVec3 apply(const CVec3& u, const CVec3& w) const {
        CVec3 out;
        for (int c = 0; c < 3; c++) {
            Cplx acc;
            for (int a = 0; a < 3; a++)
                for (int b = 0; b < 3; b++) acc += u[a] * w[b] * hess[c][a][b];
            out[c] = acc / Real(2);
        }
        return out;
    }
};

}  // namespace

ManifoldSeeder::ManifoldSeeder(const ModelSpec& spec, const PerturbationSeries& series,
                               const Params& params, ManifoldSide side, Real rho)
    : side_(side), rho_(std::move(rho)) {
    Real newton_tol = ldexp(Real(1), -static_cast<long>(current_precision_bits()) * 3 / 4);
    auto cps = critical_points(spec, series, params, newton_tol);
    base_ = side == ManifoldSide::unstable_of_s_minus ? cps.s_minus : cps.s_plus;
    bool want_unstable = side == ManifoldSide::unstable_of_s_minus;
    Real re = base_.eigen.complex_eigenvalue.re;
    if ((want_unstable && !(re > 0)) || (!want_unstable && !(re < 0)))
        throw std::runtime_error("ManifoldSeeder: complex pair has the wrong stability");

    eigvec_ = base_.eigen.complex_eigenvector;
    Vec3 re_v{eigvec_[0].re, eigvec_[1].re, eigvec_[2].re};
    Vec3 im_v{eigvec_[0].im, eigvec_[1].im, eigvec_[2].im};
    // orthonormal basis of the invariant plane
    Real n1 = norm2(re_v);
    if (n1 == 0) throw std::runtime_error("ManifoldSeeder: degenerate eigenvector");
    plane_e1_ = (Real(1) / n1) * re_v;
    Vec3 w = im_v - dot(im_v, plane_e1_) * plane_e1_;
    Real n2 = norm2(w);
    if (n2 == 0) throw std::runtime_error("ManifoldSeeder: degenerate eigenplane");
    plane_e2_ = (Real(1) / n2) * w;

    // in-plane displacement 2 Re(xi v) = 2a Re(v) - 2b Im(v); cache the 2x2
    // system expressing (a, b) from coordinates in (e1, e2)
    m11_ = 2 * dot(re_v, plane_e1_);
    m12_ = -2 * dot(im_v, plane_e1_);
    m21_ = 2 * dot(re_v, plane_e2_);
    m22_ = -2 * dot(im_v, plane_e2_);

    // quadratic jet: (A - 2 lambda I) h20 = -B(v, v),
    //                (A - (lambda + conj lambda) I) h11 = -2 B(v, conj v)
    PolyField3 field = PolyField3::build(spec, series, params);
    Vec3 at{base_.point.x, base_.point.y, base_.point.z};
    QuadraticForm B(field, at);
    const Mat3& A = base_.jacobian;
    Cplx lam = base_.eigen.complex_eigenvalue;
    {
        std::array<std::array<Cplx, 3>, 3> lhs;
        for (int i = 0; i < 3; i++)
            for (int j = 0; j < 3; j++) lhs[i][j] = Cplx(A[i][j]);
        for (int i = 0; i < 3; i++) lhs[i][i] -= Cplx(Real(2)) * lam;
        CVec3 rhs = B.apply(eigvec_, eigvec_);
        for (auto& r : rhs) r = -r;
        h20_ = solve3(lhs, rhs);
    }
    {
        CVec3 vbar{conj(eigvec_[0]), conj(eigvec_[1]), conj(eigvec_[2])};
        std::array<std::array<Cplx, 3>, 3> lhs;
        for (int i = 0; i < 3; i++)
            for (int j = 0; j < 3; j++) lhs[i][j] = Cplx(A[i][j]);
        Real two_re = 2 * lam.re;
        for (int i = 0; i < 3; i++) lhs[i][i] -= Cplx(two_re);
        CVec3 rhs = B.apply(eigvec_, vbar);
        for (auto& r : rhs) r = Cplx(Real(-2)) * r;
        CVec3 h11c = solve3(lhs, rhs);
        h11_ = {h11c[0].re, h11c[1].re, h11c[2].re};  // real by conjugate symmetry
    }
}

StateCartesian ManifoldSeeder::seed(const Real& angle) const {
    // in-plane point at distance rho
    Real c1 = rho_ * cos(angle), c2 = rho_ * sin(angle);
    // complex coordinate with 2 Re(xi v) equal to that displacement
    Real det = m11_ * m22_ - m12_ * m21_;
    Real a = (c1 * m22_ - c2 * m12_) / det;
    Real b = (m11_ * c2 - m21_ * c1) / det;
    Cplx xi(a, b);
    Cplx xi2 = xi * xi;
    Vec3 base{base_.point.x, base_.point.y, base_.point.z};
    Vec3 lin = base + c1 * plane_e1_ + c2 * plane_e2_;
    Real xi_sq = norm_sq(xi);
    StateCartesian out;
    Vec3 quad;
    for (int c = 0; c < 3; c++) quad[c] = 2 * (xi2 * h20_[c]).re + xi_sq * h11_[c];
    out.x = lin[0] + quad[0];
    out.y = lin[1] + quad[1];
    out.z = lin[2] + quad[2];
    return out;
}

std::vector<StateCartesian> seed_manifold(const ModelSpec& spec,
                                          const PerturbationSeries& series, const Params& params,
                                          ManifoldSide side, const Real& rho, int n_angles) {
    if (n_angles < 1) throw std::invalid_argument("seed_manifold: n_angles must be positive");
    ManifoldSeeder seeder(spec, series, params, side, rho);
    std::vector<StateCartesian> out;
    out.reserve(n_angles);
    for (int j = 0; j < n_angles; j++) out.push_back(seeder.seed(2 * pi() * j / n_angles));
    return out;
}

SectionCrossing shoot_to_section(const ModelSpec& spec, const PerturbationSeries& series,
                                 const Params& params, const ManifoldSeeder& seeder,
                                 const Real& seed_angle, const Real& u_section,
                                 const ManifoldConfig& cfg) {
    cfg.validate();
    PrecisionGuard guard(cfg.integrator.precision_bits + 16);
    Real z_target = tanh(spec.d * u_section);
    bool forward = seeder.side() == ManifoldSide::unstable_of_s_minus;
    Real horizon = cfg.time_horizon;
    if (horizon == 0) {
        Real rate = abs(seeder.base_point().eigen.complex_eigenvalue.re);
        horizon = 3 * (log(1 / seeder.rho()) + 10) / rate;
    }
    PolyField3 field = PolyField3::build(spec, series, params);
    StateCartesian s0 = seeder.seed(seed_angle);

    std::optional<SectionCrossing> hit;
    Real z_prev = s0.z;
    auto observer = [&](const Real& t_begin, const StepOutput& step) {
        Real z_end = step.y_end[2];
        bool bracket = (z_prev - z_target) * (z_end - z_target) <= 0 && z_end != z_prev;
        z_prev = z_end;
        if (!bracket) return true;
        // refine inside the step: bisection to a safe Newton basin, then
        // Newton with the field derivative
        Real lo = 0, hi = step.h;
        Vec3 y_lo = step.dense(lo);
        for (int it = 0; it < 60; it++) {
            Real mid = (lo + hi) / 2;
            Vec3 y_mid = step.dense(mid);
            if ((y_lo[2] - z_target) * (y_mid[2] - z_target) <= 0) {
                hi = mid;
            } else {
                lo = mid;
                y_lo = y_mid;
            }
        }
        Real tau = (lo + hi) / 2;
        // refine well past the spec gate 2^{-bits/2}; the dense polynomial is
        // cheap and the theta matching wants a quiet crossing
        Real resid_tol = ldexp(Real(1), -static_cast<long>(cfg.integrator.precision_bits) / 2);
        Real target = ldexp(Real(1), -static_cast<long>(cfg.integrator.precision_bits) + 16);
        Vec3 y{};
        for (int it = 0; it < 80; it++) {
            y = step.dense(tau);
            Real g = y[2] - z_target;
            if (abs(g) <= target) break;
            Vec3 f = field.eval(y);
            if (f[2] == 0) break;
            tau -= g / f[2];
        }
        y = step.dense(tau);
        // demand the physical orientation dz/dt > 0 near the heteroclinic
        Vec3 f = field.eval(y);
        if (!(f[2] > 0)) return true;  // skip wrong-orientation crossings
        SectionCrossing c;
        c.theta_at_section = wrap_two_pi(atan2(y[1], y[0]));
        c.r_at_section = (y[0] * y[0] + y[1] * y[1]) / 2;
        c.crossing_time = t_begin + tau;
        c.refinement_residual = abs(y[2] - z_target);
        c.seed_angle = seed_angle;
        if (c.refinement_residual > resid_tol)
            throw convergence_error("shoot_to_section: crossing refinement stalled",
                                    c.refinement_residual);
        hit = c;
        return false;  // stop at the first valid crossing
    };
    integrate(field, cfg.integrator, Vec3{s0.x, s0.y, s0.z}, forward ? horizon : -horizon,
              observer);
    if (!hit)
        throw convergence_error("shoot_to_section: no section crossing within the time horizon",
                                horizon);
    return *hit;
}

std::vector<SectionCrossing> section_radius(const ModelSpec& spec,
                                            const PerturbationSeries& series,
                                            const Params& params, ManifoldSide side,
                                            const Real& u_section,
                                            const std::vector<Real>& theta_targets,
                                            const ManifoldConfig& cfg) {
    cfg.validate();
    PrecisionGuard guard(cfg.integrator.precision_bits + 16);
    ManifoldSeeder seeder(spec, series, params, side, cfg.seed_rho);
    auto shoot = [&](const Real& phi) {
        return shoot_to_section(spec, series, params, seeder, phi, u_section, cfg);
    };
    // pilot shot fixes the angle offset of the section map
    SectionCrossing pilot = shoot(Real(0));
    Real offset = wrap_pm_pi(pilot.theta_at_section);

    std::vector<SectionCrossing> out;
    out.reserve(theta_targets.size());
    for (const Real& theta_t : theta_targets) {
        // Newton/secant on the seed angle; the section map is a near-identity
        // circle map (d theta_section / d phi ~ 1)
        Real phi = wrap_pm_pi(theta_t - offset);
        SectionCrossing cur = shoot(phi);
        Real err = wrap_pm_pi(theta_t - cur.theta_at_section);
        Real slope = 1;
        Real prev_phi = phi, prev_err = err;
        int it = 0;
        while (abs(err) > cfg.theta_match_tol && it < cfg.max_newton_iters) {
            Real step = err / slope;
            if (abs(step) > Real(1) / 2) step = step > 0 ? Real(1) / 2 : Real(-1) / 2;
            phi += step;
            cur = shoot(phi);
            err = wrap_pm_pi(theta_t - cur.theta_at_section);
            Real dphi = phi - prev_phi;
            Real derr = wrap_pm_pi(prev_err - err);
            if (dphi != 0 && abs(derr) > abs(dphi) / 10) slope = derr / dphi;
            prev_phi = phi;
            prev_err = err;
            it++;
        }
        if (abs(err) > cfg.theta_match_tol)
            throw convergence_error("section_radius: theta matching did not converge", err);
        out.push_back(cur);
    }
    return out;
}

SplittingSample splitting(const ModelSpec& spec, const PerturbationSeries& series,
                          const Params& params, const Real& u_section, int n_theta,
                          const ManifoldConfig& cfg) {
    if (n_theta < 4) throw std::invalid_argument("splitting: need at least 4 angles");
    cfg.validate();
    PrecisionGuard guard(cfg.integrator.precision_bits + 16);
    std::vector<Real> thetas;
    for (int j = 0; j < n_theta; j++) thetas.push_back(2 * pi() * j / n_theta);

    auto measure = [&](const Real& rho) {
        ManifoldConfig c = cfg;
        c.seed_rho = rho;
        auto uns = section_radius(spec, series, params, ManifoldSide::unstable_of_s_minus,
                                  u_section, thetas, c);
        auto sta = section_radius(spec, series, params, ManifoldSide::stable_of_s_plus, u_section,
                                  thetas, c);
        return std::make_pair(std::move(uns), std::move(sta));
    };
    auto [uns_a, sta_a] = measure(cfg.seed_rho);
    auto [uns_b, sta_b] = measure(cfg.seed_rho / 2);

    Real refine_worst{0};
    std::vector<Real> delta_a(n_theta), delta_b(n_theta), delta_rich(n_theta), dist_rich(n_theta);
    for (int j = 0; j < n_theta; j++) {
        delta_a[j] = uns_a[j].r_at_section - sta_a[j].r_at_section;
        delta_b[j] = uns_b[j].r_at_section - sta_b[j].r_at_section;
        // Richardson for the O(rho^2) seeding bias
        delta_rich[j] = (4 * delta_b[j] - delta_a[j]) / 3;
        Real ru = (4 * uns_b[j].r_at_section - uns_a[j].r_at_section) / 3;
        Real rs = (4 * sta_b[j].r_at_section - sta_a[j].r_at_section) / 3;
        dist_rich[j] = sqrt(2 * ru) - sqrt(2 * rs);
        for (const SectionCrossing* c : {&uns_a[j], &sta_a[j], &uns_b[j], &sta_b[j]})
            refine_worst = std::max(refine_worst, c->refinement_residual);
    }

    // integrator replication at one angle per side: tighter tolerance run
    Real integ_budget{0};
    {
        ManifoldConfig tight = cfg;
        tight.seed_rho = cfg.seed_rho / 2;
        tight.integrator.abs_tol = cfg.integrator.abs_tol / 1024;
        tight.integrator.rel_tol = cfg.integrator.rel_tol / 1024;
        auto u2 = section_radius(spec, series, params, ManifoldSide::unstable_of_s_minus,
                                 u_section, {thetas[0]}, tight);
        auto s2 = section_radius(spec, series, params, ManifoldSide::stable_of_s_plus, u_section,
                                 {thetas[0]}, tight);
        integ_budget = abs(u2[0].r_at_section - uns_b[0].r_at_section) +
                       abs(s2[0].r_at_section - sta_b[0].r_at_section);
    }

    SplittingSample sample;
    sample.delta = params.delta;
    sample.sigma = params.sigma;
    sample.u_section = u_section;
    sample.seed_radius = cfg.seed_rho;
    sample.delta_values = delta_rich;
    long cutoff = std::min<long>(4, n_theta / 2 - 1);
    sample.delta_modes = dft_modes(delta_rich, cutoff);
    sample.D_modes = dft_modes(dist_rich, cutoff);

    // seeding budget: mode-wise gap between the two rho levels (the
    // extrapolation should beat it, so this is conservative)
    FourierSeries modes_a = dft_modes(delta_a, cutoff);
    FourierSeries modes_b = dft_modes(delta_b, cutoff);
    Real seed_budget{0};
    for (long l = 0; l <= cutoff; l++)
        seed_budget = std::max(seed_budget, abs(modes_a.mode(l) - modes_b.mode(l)));
    sample.error_budget = seed_budget + 2 * integ_budget + 4 * refine_worst;
    sample.trusted = sample.error_budget < abs(sample.delta_modes.mode(1)) / 10;
    return sample;
}

bool sharp_bound_check(const ModelSpec& spec, const Params& params, const SplittingSample& sample,
                       const Real& upsilon0_abs, const Real& kappa, const Real& M) {
    Real worst{0};
    for (const Real& d : sample.delta_values) worst = std::max(worst, abs(d));
    Real du = spec.d * sample.u_section;
    Real bound = pow(cosh(du), 2 / spec.d) *
                 (upsilon0_abs + M * pow(params.delta, spec.p - 2 / spec.d) *
                                     pow(kappa, -3 - 2 / spec.d) *
                                     exp(-params.alpha * pi() / (2 * spec.d * params.delta) +
                                         params.alpha * kappa));
    return worst <= bound;
}

}  // namespace hz
