#include <doctest.h>

#include "hz/melnikov.hpp"
#include "test_systems.hpp"

using namespace hz;
using testsys::System;

namespace {

ScalarConfig cfg_bits(unsigned bits, const char* tol) {
    ScalarConfig cfg;
    cfg.precision_bits = bits;
    cfg.quadrature_rel_tol = Real(tol);
    return cfg;
}

}  // namespace

TEST_CASE("melnikov_pointwise: zero forcing gives zero") {
    PrecisionGuard g(192);
    System s0;
    auto pr = Params::make(s0.spec, Real(1) / 10, Real(0));
    auto cfg = cfg_bits(192, "1e-25");
    CHECK(melnikov_pointwise(s0.spec, s0.series, pr, Real(1) / 2, Real(1), cfg) == 0);
}

TEST_CASE("upsilon0: conservative averages vanish") {
    auto cfg = cfg_bits(256, "1e-30");
    PrecisionGuard g(cfg.precision_bits);
    // TestSystemC: the mode-0 forcing vanishes identically
    System sc = testsys::system_c();
    auto prc = Params::make(sc.spec, Real(1) / 10, Real(0));
    CHECK(abs(upsilon0_quadrature(sc.spec, sc.series, prc, 0, cfg).value) == 0);
    // TestSystemR: nonzero integrand cancelling through the first integral
    System sr = testsys::system_r();
    auto prr = Params::make(sr.spec, Real(1) / 10, Real(0));
    auto res = upsilon0_quadrature(sr.spec, sr.series, prr, 0, cfg);
    Real scale = pow(prr.delta, sr.spec.p + 3);
    CHECK(abs(res.value) <= Real("1e-25") * scale);
}

TEST_CASE("upsilon0 quadrature: reality symmetry l=-1 vs l=+1") {
    auto cfg = cfg_bits(256, "1e-28");
    PrecisionGuard g(cfg.precision_bits);
    System s = testsys::system_c();
    auto pr = Params::make(s.spec, Real(1) / 5, Real(0));
    Cplx up = upsilon0_quadrature(s.spec, s.series, pr, 1, cfg).value;
    Cplx um = upsilon0_quadrature(s.spec, s.series, pr, -1, cfg).value;
    CHECK(abs(um - conj(up)) <= Real("1e-20") * abs(up));
}

TEST_CASE("upsilon0: gamma-series route against shifted-contour quadrature") {
    auto cfg = cfg_bits(256, "1e-28");
    PrecisionGuard g(cfg.precision_bits);
    for (const System& s : {testsys::system_c(), testsys::system_d1()}) {
        auto pr = Params::make(s.spec, Real(1) / 10, Real(0));
        for (long l : {1L, -1L}) {
            Cplx quad = upsilon0_quadrature(s.spec, s.series, pr, l, cfg).value;
            Cplx series = upsilon0_gamma_series(s.spec, s.series, pr, l, cfg);
            CHECK(abs(quad - series) <= Real("1e-20") * abs(series));
        }
    }
    // zero series
    System s0;
    auto pr0 = Params::make(s0.spec, Real(1) / 10, Real(0));
    CHECK(abs(upsilon0_gamma_series(s0.spec, s0.series, pr0, 1, cfg)) == 0);
}

TEST_CASE("upsilon0: single-coefficient closed forms") {
    auto cfg = cfg_bits(256, "1e-28");
    PrecisionGuard g(cfg.precision_bits);
    // f = x^3 alone: the f-route mode table uses a_{k+1,m} = mode-1 of cos^4,
    // which vanishes by parity; both routes must agree at exactly zero
    {
        System s;
        s.spec.conservative = false;
        s.series.add_f(3, 3, 0, 0, Real(1));
        auto pr = Params::make(s.spec, Real(1) / 10, Real(0));
        CHECK(abs(upsilon0_gamma_series(s.spec, s.series, pr, 1, cfg)) == 0);
        CHECK(abs(upsilon0_quadrature(s.spec, s.series, pr, 1, cfg).value) <=
              Real("1e-32") * pow(pr.delta, 3));
    }
    // f = x^2 z alone: Upsilon = delta^{p+3} (sqrt(2))^3 (3/8) I_{1, 3+2}^{1,0}
    {
        System s;
        s.spec.conservative = false;
        s.series.add_f(3, 2, 0, 1, Real(1));
        auto pr = Params::make(s.spec, Real(1) / 10, Real(0));
        Cplx i15 = I_recurrence(IIntegralKey{1, Real(5), 1, Real(0), pr.alpha / pr.delta, Real(1)},
                                I_closed_beta(Real(4), Real(0), pr.alpha / pr.delta, Real(1)),
                                Cplx());
        Cplx expected = Cplx(pow(pr.delta, 3) * pow_int(sqrt(Real(2)), 3) * Real(3) / 8) * i15;
        Cplx got = upsilon0_gamma_series(s.spec, s.series, pr, 1, cfg);
        CHECK(abs(got - expected) <= Real("1e-60") * abs(expected));
        Cplx quad = upsilon0_quadrature(s.spec, s.series, pr, 1, cfg).value;
        CHECK(abs(quad - expected) <= Real("1e-20") * abs(expected));
    }
}

TEST_CASE("melnikov reconstruction: pointwise equals mode sum") {
    auto cfg = cfg_bits(256, "1e-25");
    PrecisionGuard g(cfg.precision_bits);
    System s = testsys::system_c();
    auto pr = Params::make(s.spec, Real(1) / 10, Real(0));
    auto coeffs = melnikov_coefficients(s.spec, s.series, pr, 4, cfg);
    CHECK(coeffs.upsilon0.reality_defect() <= Real("1e-25"));
    for (Real theta : {Real(0), Real(1), Real(3)}) {
        Real direct = melnikov_pointwise(s.spec, s.series, pr, Real(0), theta, cfg);
        Real recon = melnikov_from_modes(s.spec, pr, coeffs.upsilon0, Real(0), theta);
        Real scale = abs(coeffs.upsilon0.mode(1)) * 2;
        CHECK(abs(direct - recon) <= Real("1e-15") * scale);
    }
}

TEST_CASE("melnikov theta-average equals sigma I + delta^{p+3} J") {
    auto cfg = cfg_bits(256, "1e-28");
    PrecisionGuard g(cfg.precision_bits);
    System s = testsys::system_d();
    Real delta = Real(1) / 10;
    Real sigma = Real("2e-4");
    auto pr = Params::make(s.spec, delta, sigma);
    auto ij = average_IJ(s.spec, s.series, pr, cfg);
    Real predicted = sigma * ij.I + pow(delta, s.spec.p + 3) * ij.J;
    Real avg = upsilon0_quadrature(s.spec, s.series, pr, 0, cfg).value.re;
    CHECK(abs(avg - predicted) <= Real("1e-24") * abs(predicted));
    // and the average of the pointwise Melnikov function over theta matches:
    // M has no theta dependence for this rotationally symmetric system
    Real m0 = melnikov_pointwise(s.spec, s.series, pr, Real(0), Real(0), cfg);
    CHECK(abs(m0 - predicted) <= Real("1e-20") * abs(predicted));
}

TEST_CASE("average_IJ: closed-form values") {
    auto cfg = cfg_bits(192, "1e-25");
    PrecisionGuard g(cfg.precision_bits);
    System s0;  // d = b = 1
    auto pr = Params::make(s0.spec, Real(1) / 10, Real(0));
    auto ij0 = average_IJ(s0.spec, s0.series, pr, cfg);
    CHECK(abs(ij0.I - Real(8) / 3) <= Real("1e-40"));
    CHECK(ij0.J == 0);
    // TestSystemD: J = 2 int tanh^4 sech^2 = 4/5, delta-independent
    System sd = testsys::system_d();
    for (Real delta : {Real(1) / 10, Real(1) / 5}) {
        auto prd = Params::make(sd.spec, delta, Real(0));
        auto ij = average_IJ(sd.spec, sd.series, prd, cfg);
        CHECK(abs(ij.J - Real(4) / 5) <= Real("1e-22"));
    }
    // I by quadrature cross-check: (d+1)/b int sech^{2/d+2} with d = 2, b = 3
    System s2;
    s2.spec.d = 2;
    s2.spec.b = 3;
    auto pr2 = Params::make(s2.spec, Real(1) / 10, Real(0));
    auto ij2 = average_IJ(s2.spec, s2.series, pr2, cfg);
    auto direct = trapezoid_line(
        [&](const Real& w) -> Cplx {
            return Cplx(1 / pow(cosh(2 * w), Real(3)));
        },
        Real("1e-25"));
    CHECK(abs(ij2.I - direct.value.re) <= Real("1e-20") * ij2.I);
}

TEST_CASE("sigma_star: zero series and TestSystemD ladder") {
    auto cfg = cfg_bits(256, "1e-28");
    PrecisionGuard g(cfg.precision_bits);
    {
        System s0;
        s0.spec.conservative = false;
        CHECK(sigma_star(s0.spec, s0.series, Real(1) / 10, cfg) == 0);
    }
    System sd = testsys::system_d();
    for (Real delta : {Real(1) / 5, Real(1) / 10, Real(1) / 20}) {
        Real st = sigma_star(sd.spec, sd.series, delta, cfg);
        Real dp3 = pow(delta, sd.spec.p + 3);
        // exact -J/I = -(4/5)/(8/3) = -3/10 for this system at every delta
        CHECK(abs(st / dp3 + Real(3) / 10) <= Real("1e-20"));
        // residual below the spec gate
        auto pr = Params::make(sd.spec, delta, st);
        auto ij = average_IJ(sd.spec, sd.series, pr, cfg);
        Real resid = abs(upsilon0_quadrature(sd.spec, sd.series, pr, 0, cfg).value);
        CHECK(resid <= Real("1e-20") * (abs(st) * ij.I + dp3 * abs(ij.J)));
    }
    System sc = testsys::system_c();
    CHECK_THROWS_AS(sigma_star(sc.spec, sc.series, Real(1) / 10, cfg), std::invalid_argument);
}

TEST_CASE("borel constant: pinned regression values and symmetry zero") {
    auto cfg = cfg_bits(256, "1e-28");
    PrecisionGuard g(cfg.precision_bits);
    // TestSystemC: C = -(7 sqrt(2) pi / 120) i, from the term-by-term Borel
    // sum (f-part through a_{3,0} = 3/8, h-part through a_{1,0} = 1/2, both
    // landing on w^6 -> zeta^5 / Gamma(6))
    {
        auto b = borel_constant(testsys::system_c().spec, testsys::system_c().series, cfg);
        Real expected = 7 * sqrt(Real(2)) * pi() / 120;
        CHECK(abs(b.C1) <= Real("1e-70"));
        CHECK(abs(b.C2 - expected) <= Real("1e-70"));
        CHECK(b.series_terms_used == 2);
    }
    // TestSystemD1: C2 = sqrt(2) pi / 40 (f-part only; z^3 is symmetric)
    {
        auto b = borel_constant(testsys::system_d1().spec, testsys::system_d1().series, cfg);
        CHECK(abs(b.C1) <= Real("1e-70"));
        CHECK(abs(b.C2 - sqrt(Real(2)) * pi() / 40) <= Real("1e-70"));
    }
    // rotationally symmetric perturbations have no first harmonic
    CHECK(abs(borel_constant(testsys::system_r().spec, testsys::system_r().series, cfg).C()) == 0);
    CHECK(abs(borel_constant(testsys::system_d().spec, testsys::system_d().series, cfg).C()) == 0);
}

TEST_CASE("upsilon0 mode 1 approaches the asymptotic law") {
    auto cfg = cfg_bits(256, "1e-28");
    PrecisionGuard g(cfg.precision_bits);
    System s = testsys::system_c();
    auto borel = borel_constant(s.spec, s.series, cfg);
    Real prev_defect{0};
    int idx = 0;
    for (Real delta : {Real(1) / 10, Real(1) / 20}) {
        auto pr = Params::make(s.spec, delta, Real(0));
        Cplx up = upsilon0_quadrature(s.spec, s.series, pr, 1, cfg).value;
        Cplx law = upsilon1_asymptotic_value(s.spec, pr, borel);
        Real defect = abs(up / law - Cplx(Real(1)));
        // magnitude within (1 + 5 delta) of the law
        CHECK(abs(up) <= abs(law) * (1 + 5 * delta));
        CHECK(abs(up) >= abs(law) / (1 + 5 * delta));
        if (idx > 0) {
            // deviation shrinks proportionally to delta within factor 3
            CHECK(defect <= prev_defect / 2 * 3);
            CHECK(defect >= prev_defect / 2 / 3);
        }
        prev_defect = defect;
        idx++;
    }
}

TEST_CASE("higher modes decay like the l-th power law") {
    auto cfg = cfg_bits(256, "1e-25");
    PrecisionGuard g(cfg.precision_bits);
    System s = testsys::system_c();
    auto pr = Params::make(s.spec, Real(1) / 5, Real(0));
    auto coeffs = melnikov_coefficients(s.spec, s.series, pr, 3, cfg);
    // TestSystemC's forcing carries modes +-1 and +-3 only (cos^3 and cos)
    CHECK(abs(coeffs.upsilon0.mode(2)) == 0);
    Real k_scale = pow(pr.delta, s.spec.p - 2 / s.spec.d);
    // |Upsilon^(3)| <= K delta^{p-2/d} e^{-(3*3/4) alpha pi/(2 d delta)}
    Real gate3 = exp(-(Real(3) * 3 / 4) * pr.alpha * pi() / (2 * s.spec.d * pr.delta));
    CHECK(abs(coeffs.upsilon0.mode(3)) <= 100 * k_scale * gate3);
    CHECK(abs(coeffs.upsilon0.mode(3)) < abs(coeffs.upsilon0.mode(1)));
}

TEST_CASE("melnikov_asymptotic tracks melnikov_pointwise as delta shrinks") {
    auto cfg = cfg_bits(256, "1e-25");
    PrecisionGuard g(cfg.precision_bits);
    System s = testsys::system_c();
    Real defects[2];
    int idx = 0;
    for (Real delta : {Real(1) / 10, Real(1) / 20}) {
        auto pr = Params::make(s.spec, delta, Real(0));
        Real u = Real(1) / 4, theta = Real(1) / 2;
        Real direct = melnikov_pointwise(s.spec, s.series, pr, u, theta, cfg);
        Real asym = melnikov_asymptotic(s.spec, s.series, pr, u, theta, cfg);
        defects[idx++] = abs(asym / direct - 1);
    }
    CHECK(defects[1] <= defects[0]);  // improves with delta
    CHECK(defects[1] <= Real(1) / 2);
    // pointwise relative error shrinks like delta within factor 3
    CHECK(defects[1] <= defects[0] / 2 * 3);
}

TEST_CASE("r10 graphs: zero case, Melnikov identity, decay bound") {
    auto cfg = cfg_bits(256, "1e-25");
    PrecisionGuard g(cfg.precision_bits);
    {
        System s0;
        auto pr = Params::make(s0.spec, Real(1) / 10, Real(0));
        CHECK(r10_graph(s0.spec, s0.series, pr, ManifoldBranch::unstable, Real(1) / 2, Real(1),
                        cfg) == 0);
    }
    System s = testsys::system_c();
    auto pr = Params::make(s.spec, Real(1) / 10, Real(0));
    // M = r10^u - r10^s pointwise
    for (Real u : {Real(0), Real(1) / 2}) {
        for (Real theta : {Real(0), Real(2)}) {
            Real ru = r10_graph(s.spec, s.series, pr, ManifoldBranch::unstable, u, theta, cfg);
            Real rs = r10_graph(s.spec, s.series, pr, ManifoldBranch::stable, u, theta, cfg);
            Real m = melnikov_pointwise(s.spec, s.series, pr, u, theta, cfg);
            Real scale = abs(ru) + abs(rs) + pow(pr.delta, 3);
            CHECK(abs((ru - rs) - m) <= Real("1e-18") * scale);
        }
    }
    // |r10| <= 100 delta^{p+3} sech^3(d u) on u in [-2, 2]
    for (int i = -4; i <= 4; i++) {
        Real u = Real(i) / 2;
        Real ru = r10_graph(s.spec, s.series, pr, ManifoldBranch::unstable, u, Real(1), cfg);
        Real bound = 100 * pow(pr.delta, s.spec.p + 3) / pow_int(cosh(s.spec.d * u), 3);
        CHECK(abs(ru) <= bound);
    }
}
