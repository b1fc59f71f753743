#include <doctest.h>

#include "hz/taylor_ode.hpp"
#include "test_systems.hpp"

using namespace hz;
using testsys::System;

namespace {

IntegratorConfig taylor_cfg(unsigned bits, const char* tol) {
    IntegratorConfig cfg;
    cfg.method = IntegratorConfig::Method::taylor_series;
    cfg.precision_bits = bits;
    cfg.abs_tol = Real(tol);
    cfg.rel_tol = Real(tol);
    return cfg;
}

}  // namespace

TEST_CASE("taylor: closed-form axis and heteroclinic solutions") {
    PrecisionGuard g(192);
    auto cfg = taylor_cfg(160, "1e-40");
    System s;
    s.spec.d = Real(3) / 2;  // general d
    auto pr = Params::make(s.spec, Real(1) / 10, Real(0));

    // on the axis r = 0: dz/dt = -1 + z^2, z(0) = 0 -> z(t) = -tanh(t)
    {
        auto res = integrate(s.spec, s.series, pr, cfg, {Real(0), Real(0), Real(0)}, Real(1));
        CHECK(abs(res.state[2] + tanh(Real(1))) < Real("1e-38"));
        CHECK(abs(res.state[0]) == 0);
    }
    // on the heteroclinic surface: z(t) = tanh(d t), r(t) = R0(t)
    {
        Real x0 = sqrt((s.spec.d + 1) / s.spec.b);  // 2 R0(0)
        auto res = integrate(s.spec, s.series, pr, cfg, {x0, Real(0), Real(0)}, Real(1));
        Real z_want = tanh(s.spec.d * 1);
        CHECK(abs(res.state[2] - z_want) < Real("1e-36"));
        Real r = (res.state[0] * res.state[0] + res.state[1] * res.state[1]) / 2;
        Real r_want = (s.spec.d + 1) / (2 * s.spec.b * cosh(s.spec.d) * cosh(s.spec.d));
        CHECK(abs(r - r_want) < Real("1e-36"));
    }
}

TEST_CASE("taylor: forward-backward round trip") {
    PrecisionGuard g(192);
    auto cfg = taylor_cfg(160, "1e-40");
    System s = testsys::system_c();
    auto pr = Params::make(s.spec, Real(1) / 5, Real(0));
    StateCartesian st{Real(1), Real(1) / 4, Real(-1) / 10};
    auto fwd = integrate(s.spec, s.series, pr, cfg, st, Real(2));
    auto back = integrate(s.spec, s.series, pr, cfg,
                          {fwd.state[0], fwd.state[1], fwd.state[2]}, Real(-2));
    Vec3 start{st.x, st.y, st.z};
    CHECK(norm_inf(back.state - start) < 10 * Real("1e-40") * 100);
}

TEST_CASE("taylor: perturbed trajectory shadows the heteroclinic graph") {
    PrecisionGuard g(192);
    auto cfg = taylor_cfg(160, "1e-35");
    System s = testsys::system_c();
    Real delta = Real(1) / 5;
    auto pr = Params::make(s.spec, delta, Real(0));
    // start exactly on the unperturbed heteroclinic at u = -1
    auto het = heteroclinic(s.spec, pr, Real(-1), Real(0));
    StateCartesian st = to_cartesian({het.R0, het.Theta0, het.Z0});
    Real bound = 50 * pow(delta, s.spec.p + 3);
    long checks = 0;
    auto observer = [&](const Real&, const StepOutput& step) {
        Vec3 y = step.y_end;
        Real r = (y[0] * y[0] + y[1] * y[1]) / 2;
        Real z = y[2];
        if (abs(z) < Real(9) / 10) {
            // graph distance: r vs R0 at u = atanh(z)/d
            Real u = atanh(z) / s.spec.d;
            Real r0 = (s.spec.d + 1) / (2 * s.spec.b * pow_int(cosh(s.spec.d * u), 2));
            CHECK(abs(r - r0) <= bound);
            checks++;
        }
        return true;
    };
    integrate(s.spec, s.series, pr, cfg, st, Real(2), observer);
    CHECK(checks > 3);
}

TEST_CASE("gauss collocation agrees with taylor") {
    PrecisionGuard g(192);
    System s = testsys::system_c();
    auto pr = Params::make(s.spec, Real(1) / 5, Real(0));
    StateCartesian st{Real("0.9"), Real("0.1"), Real("-0.2")};
    auto cfg_t = taylor_cfg(160, "1e-36");
    IntegratorConfig cfg_g = cfg_t;
    cfg_g.method = IntegratorConfig::Method::gauss_collocation;
    cfg_g.gauss_stages = 6;
    auto a = integrate(s.spec, s.series, pr, cfg_t, st, Real(3) / 2);
    auto b = integrate(s.spec, s.series, pr, cfg_g, st, Real(3) / 2);
    CHECK(norm_inf(a.state - b.state) < Real("1e-30"));
    CHECK(b.steps > 0);
}

TEST_CASE("gauss: tightening the tolerance tightens the defect") {
    PrecisionGuard g(192);
    System s = testsys::system_c();
    auto pr = Params::make(s.spec, Real(1) / 5, Real(0));
    StateCartesian st{Real("0.9"), Real("0.1"), Real("-0.2")};
    // reference from taylor at much higher accuracy
    auto ref = integrate(s.spec, s.series, pr, taylor_cfg(224, "1e-55"), st, Real(1));
    Real defects[2];
    int i = 0;
    for (const char* tol : {"1e-18", "1e-30"}) {
        IntegratorConfig cfg = taylor_cfg(192, tol);
        cfg.method = IntegratorConfig::Method::gauss_collocation;
        auto res = integrate(s.spec, s.series, pr, cfg, st, Real(1));
        defects[i++] = norm_inf(res.state - ref.state);
    }
    CHECK(defects[1] < defects[0]);
    CHECK(defects[1] < Real("1e-24"));
}

TEST_CASE("blow-up detection") {
    PrecisionGuard g(128);
    auto cfg = taylor_cfg(96, "1e-20");
    System s;
    auto pr = Params::make(s.spec, Real(1) / 10, Real(0));
    // dz/dt = -1 + z^2 from z = 2 blows up in finite time
    CHECK_THROWS_WITH_AS(integrate(s.spec, s.series, pr, cfg, {Real(0), Real(0), Real(2)},
                                   Real(10)),
                         doctest::Contains("blow-up"), std::runtime_error);
}

TEST_CASE("variational flow preserves volume for conservative systems") {
    PrecisionGuard g(192);
    auto cfg = taylor_cfg(160, "1e-38");
    System s = testsys::system_c();
    auto pr = Params::make(s.spec, Real(1) / 5, Real(0));
    auto het = heteroclinic(s.spec, pr, Real(-1), Real(0));
    StateCartesian st0 = to_cartesian({het.R0, het.Theta0, het.Z0});
    PolyField3 field = PolyField3::build(s.spec, s.series, pr);
    auto res = integrate_variational(field, cfg, {st0.x, st0.y, st0.z}, Real(2));
    // det of the monodromy must stay at 1 within ~10x the step tolerance
    const Mat3& m = res.monodromy;
    Real det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    CHECK(abs(det - 1) < res.steps * 10 * Real("1e-38"));
    // and the monodromy is a genuine derivative: finite-difference probe
    Real h = Real("1e-25");
    auto shifted = integrate(field, cfg, {st0.x + h, st0.y, st0.z}, Real(2));
    auto base = integrate(field, cfg, {st0.x, st0.y, st0.z}, Real(2));
    for (int c = 0; c < 3; c++) {
        Real fd = (shifted.state[c] - base.state[c]) / h;
        CHECK(abs(fd - m[c][0]) < Real("1e-8"));  // O(h) finite-difference error
    }
}

TEST_CASE("dissipative flow contracts volume at the expected rate") {
    PrecisionGuard g(192);
    auto cfg = taylor_cfg(160, "1e-38");
    System s = testsys::system_d();
    Real delta = Real(1) / 5;
    Real sigma = Real("1e-3");
    auto pr = Params::make(s.spec, delta, sigma);
    PolyField3 field = PolyField3::build(s.spec, s.series, pr);
    // div = 2 sigma + 3 delta^{p+3} z^2; integrate along the pure-axis orbit
    // and compare det with exp(int div dt) computed from the dense z(t)
    Vec3 y0{Real(0), Real(0), Real(0)};
    std::vector<std::pair<Real, Real>> zs;  // (t, z)
    auto obs = [&](const Real& t0, const StepOutput& st) {
        zs.emplace_back(t0 + st.h, st.y_end[2]);
        return true;
    };
    auto res = integrate_variational(field, cfg, y0, Real(1));
    auto traj = integrate(field, cfg, y0, Real(1), obs);
    const Mat3& m = res.monodromy;
    Real det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    // div = 2 sigma + 3 delta^{p+3} z^2 > 0: volume expands, but no faster
    // than exp(2 sigma + 3 delta^{p+3}) over unit time with |z| < 1
    CHECK(det > 1);
    CHECK(det < exp(2 * sigma + 3 * pow(delta, s.spec.p + 3)));
    CHECK(traj.state[2] < 0);
    CHECK(zs.size() == static_cast<std::size_t>(traj.steps));
}
