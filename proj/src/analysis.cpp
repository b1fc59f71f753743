#include "hz/analysis.hpp"

#include <algorithm>

namespace hz {

namespace {

Real wrap_pm_pi(Real a) {
    Real two_pi = 2 * pi();
    a = fmod(a, two_pi);
    if (a > pi()) a -= two_pi;
    if (a <= -pi()) a += two_pi;
    return a;
}

Mat3 invert3(const Mat3& m) {
    Mat3 inv;
    for (int col = 0; col < 3; col++) {
        Vec3 e{Real(0), Real(0), Real(0)};
        e[col] = 1;
        Vec3 x = solve3(m, e);
        for (int r = 0; r < 3; r++) inv[r][col] = x[r];
    }
    return inv;
}

Real norm_inf_mat(const Mat3& m) {
    Real best{0};
    for (int r = 0; r < 3; r++) {
        Real row = abs(m[r][0]) + abs(m[r][1]) + abs(m[r][2]);
        if (row > best) best = row;
    }
    return best;
}

}  // namespace

FitResult fit_exponential_law(const std::vector<SplittingSample>& samples,
                              const ModelSpec& spec) {
    std::vector<const SplittingSample*> use;
    for (const auto& s : samples)
        if (s.trusted) use.push_back(&s);
    if (use.size() < 4)
        throw std::invalid_argument("fit_exponential_law: need at least 4 trusted samples");
    Real dmin = use.front()->delta, dmax = dmin;
    for (const auto* s : use) {
        dmin = std::min(dmin, s->delta);
        dmax = std::max(dmax, s->delta);
    }
    if (dmax < 2 * dmin)
        throw std::invalid_argument("fit_exponential_law: delta range spans less than factor 2");

    // weighted least squares on log|mode1| with basis (1, log delta, -1/delta)
    Mat3 M{};
    Vec3 rhs{Real(0), Real(0), Real(0)};
    for (const auto* s : use) {
        Real m1 = abs(s->delta_modes.mode(1));
        if (!(m1 > 0)) throw std::invalid_argument("fit_exponential_law: zero mode-1 sample");
        Real y = log(m1);
        Vec3 a{Real(1), log(s->delta), -1 / s->delta};
        Real w = 1 / (s->error_budget * s->error_budget);
        for (int i = 0; i < 3; i++) {
            for (int j = 0; j < 3; j++) M[i][j] += w * a[i] * a[j];
            rhs[i] += w * a[i] * y;
        }
    }
    Vec3 beta = solve3(M, rhs);

    FitResult out;
    out.log_prefactor = beta[0];
    out.power = beta[1];
    out.rate = beta[2];

    Real ss{0}, wsum{0};
    for (const auto* s : use) {
        Real y = log(abs(s->delta_modes.mode(1)));
        Real fitval = beta[0] + beta[1] * log(s->delta) - beta[2] / s->delta;
        Real r = y - fitval;
        out.residuals.push_back(r);
        Real w = 1 / (s->error_budget * s->error_budget);
        ss += w * r * r;
        wsum += w;
    }
    out.residual_rms = sqrt(ss / wsum);
    Mat3 Minv = invert3(M);
    out.condition_estimate = norm_inf_mat(M) * norm_inf_mat(Minv);
    Real dof = Real(static_cast<long>(use.size()) - 3);
    Real s2 = dof > 0 ? ss / dof : Real(0);
    out.prefactor_uncertainty = sqrt(s2 * Minv[0][0]);
    out.power_uncertainty = sqrt(s2 * Minv[1][1]);
    out.rate_uncertainty = sqrt(s2 * Minv[2][2]);

    // constrained fit: power pinned to p - 2/d sharpens the rate
    Real pinned = spec.p - 2 / spec.d;
    Real a11{0}, a12{0}, a22{0}, b1{0}, b2{0};
    for (const auto* s : use) {
        Real y = log(abs(s->delta_modes.mode(1))) - pinned * log(s->delta);
        Real w = 1 / (s->error_budget * s->error_budget);
        Real x = -1 / s->delta;
        a11 += w;
        a12 += w * x;
        a22 += w * x * x;
        b1 += w * y;
        b2 += w * x * y;
    }
    Real det = a11 * a22 - a12 * a12;
    out.log_prefactor_constrained = (b1 * a22 - b2 * a12) / det;
    out.rate_constrained = (a11 * b2 - a12 * b1) / det;
    return out;
}

Cplx mode1_prediction_at_section(const ModelSpec& spec, const Params& params, const Real& u,
                                 const Cplx& upsilon1) {
    Real du = spec.d * u;
    Real phase = params.alpha / params.delta * u + spec.c / spec.d * log(cosh(du));
    return Cplx(pow(cosh(du), 2 / spec.d)) * Cplx(cos(phase), sin(phase)) * upsilon1;
}

ComparisonReport compare_routes(const ModelSpec& spec, const PerturbationSeries& series,
                                const std::vector<SplittingSample>& samples,
                                const ScalarConfig& scfg) {
    ComparisonReport rep;
    rep.L0 = L0_constant(spec, series);
    rep.borel = borel_constant(spec, series, scfg);
    for (const auto& s : samples) {
        Params pr = Params::make(spec, s.delta, s.sigma);
        ComparisonRow row;
        row.delta = s.delta;
        row.sigma = s.sigma;
        row.trusted = s.trusted;
        row.measured_mode1 = s.delta_modes.mode(1);
        row.measured_budget = s.error_budget;
        row.measured_avg = s.delta_modes.mode(0).re;

        auto mel = upsilon0_quadrature(spec, series, pr, 1, scfg);
        Cplx mel_pred = mode1_prediction_at_section(spec, pr, s.u_section, mel.value);
        row.melnikov_mode1 = mel_pred;
        row.melnikov_err = mel.error_estimate;

        Cplx asym = upsilon1_asymptotic_value(spec, pr, rep.borel);
        Cplx asym_pred = mode1_prediction_at_section(spec, pr, s.u_section, asym);
        row.asymptotic_mode1 = asym_pred;

        // hat correction: e^{-i alpha/d L0 delta^{p+2} log delta} on Upsilon
        Real corr = -pr.alpha / spec.d * rep.L0 * pow(pr.delta, spec.p + 2) * log(pr.delta);
        Cplx hat(cos(corr), sin(corr));

        auto ratio = [](const Cplx& a, const Cplx& b) {
            Real bb = abs(b);
            return bb > 0 ? abs(a) / bb : Real(0);
        };
        auto gap = [&](const Cplx& a, const Cplx& b) {
            if (abs(a) == 0 || abs(b) == 0) return Real(0);
            return abs(wrap_pm_pi(arg(a) - arg(b)));
        };
        row.ratio_melnikov = ratio(row.measured_mode1, mel_pred);
        row.ratio_asymptotic = ratio(row.measured_mode1, asym_pred);
        row.phase_gap_melnikov = gap(row.measured_mode1, mel_pred);
        row.phase_gap_melnikov_L0 = gap(row.measured_mode1, mel_pred * hat);
        row.phase_gap_asymptotic = gap(row.measured_mode1, asym_pred);
        row.phase_gap_asymptotic_L0 = gap(row.measured_mode1, asym_pred * hat);
        rep.rows.push_back(std::move(row));
    }
    // deviations along a decreasing-delta ladder
    std::vector<const ComparisonRow*> ordered;
    for (const auto& r : rep.rows)
        if (r.trusted) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const ComparisonRow* a, const ComparisonRow* b) { return a->delta > b->delta; });
    rep.melnikov_deviation_shrinks = ordered.size() >= 2;
    for (std::size_t i = 0; i + 1 < ordered.size(); i++) {
        if (abs(ordered[i + 1]->ratio_melnikov - 1) > abs(ordered[i]->ratio_melnikov - 1))
            rep.melnikov_deviation_shrinks = false;
    }
    return rep;
}

ComparisonReport compare_routes(const ModelSpec& spec, const PerturbationSeries& series,
                                const std::vector<Real>& delta_ladder, SigmaMode sigma_mode,
                                const Real& sigma_fixed, const Real& u_section, int n_theta,
                                const ManifoldConfig& mcfg, const ScalarConfig& scfg) {
    std::vector<SplittingSample> samples;
    for (const Real& delta : delta_ladder) {
        Real sigma = 0;
        if (sigma_mode == SigmaMode::star) sigma = sigma_star(spec, series, delta, scfg);
        if (sigma_mode == SigmaMode::fixed) sigma = sigma_fixed;
        Params pr = Params::make(spec, delta, sigma);
        samples.push_back(splitting(spec, series, pr, u_section, n_theta, mcfg));
    }
    return compare_routes(spec, series, samples, scfg);
}

}  // namespace hz
