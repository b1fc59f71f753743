#include <doctest.h>

#include "hz/complex.hpp"
#include "hz/fourier.hpp"
#include "hz/linalg.hpp"
#include "hz/real.hpp"

#include <random>

using namespace hz;

TEST_CASE("precision guard sets and restores working precision") {
    PrecisionGuard g(256);
    Real x = sqrt(Real(2));
    CHECK(abs(x * x - 2) < ldexp(Real(1), -250));
    {
        PrecisionGuard g2(128);
        CHECK(current_precision_bits() >= 128);
        CHECK(current_precision_bits() < 200);
    }
    CHECK(current_precision_bits() >= 256);
}

TEST_CASE("decimal string round trip") {
    PrecisionGuard g(256);
    Real x = parse_real("0.1");
    Real y = parse_real(to_decimal_string(x));
    CHECK(x == y);
    CHECK_THROWS_AS(parse_real("not-a-number"), std::invalid_argument);
}

TEST_CASE("complex arithmetic and principal branches") {
    PrecisionGuard g(192);
    Real eps = ldexp(Real(1), -180);
    Cplx i = imag_unit();

    CHECK(abs(i * i + Cplx(Real(1))) < eps);
    CHECK(abs(exp(Cplx(Real(0), pi())) + Cplx(Real(1))) < eps);

    // log on the principal branch
    Cplx z(Real(-2), Real(1) / 1000);
    CHECK(abs(exp(log(z)) - z) < eps);
    CHECK(log(Cplx(Real(-1), Real(0))).im == pi());

    // pow against integer powers
    Cplx w(Real(2) / 3, Real(-5) / 7);
    CHECK(abs(pow(w, Cplx(Real(3))) - pow_int(w, 3)) < eps);

    // complex cosh/sinh against the addition formulas
    Cplx a(Real(1) / 3, Real(2) / 5);
    CHECK(abs(cosh(a) * cosh(a) - sinh(a) * sinh(a) - Cplx(Real(1))) < eps);
}

TEST_CASE("trig monomial Fourier modes: pinned table entries") {
    PrecisionGuard g(128);
    Real eps = ldexp(Real(1), -120);
    CHECK(abs(trig_monomial_mode(1, 0, 1) - Cplx(Real(1) / 2)) < eps);
    CHECK(abs(trig_monomial_mode(0, 1, 1) - Cplx(Real(0), Real(-1) / 2)) < eps);
    CHECK(abs(trig_monomial_mode(2, 0, 1)) == 0);
    CHECK(abs(trig_monomial_mode(3, 0, 1) - Cplx(Real(3) / 8)) < eps);
    // mode 1 of cos^5: (1/16)(10 cos + 5 cos3 + cos5) -> 10/32
    CHECK(abs(trig_monomial_mode(5, 0, 1) - Cplx(Real(10) / 32)) < eps);
    CHECK(abs(trig_monomial_mode(0, 0, 0) - Cplx(Real(1))) < eps);
    CHECK(abs(trig_monomial_mode(4, 0, 1)) == 0);
}

TEST_CASE("trig monomial modes match numerical Fourier coefficients") {
    PrecisionGuard g(128);
    Real eps = ldexp(Real(1), -100);
    // quadrature oracle: (1/2pi) int cos^k sin^m e^{-il theta}
    auto oracle = [&](int k, int m, long l) {
        const int N = 512;  // trig polynomial of degree <= 7: DFT is exact
        Cplx acc;
        Real two_pi = 2 * pi();
        for (int j = 0; j < N; j++) {
            Real th = two_pi * j / N;
            Real v = pow_int(cos(th), k) * pow_int(sin(th), m);
            acc += Cplx(v * cos(l * th), -v * sin(l * th));
        }
        return acc / Real(N);
    };
    for (int k = 0; k <= 4; k++)
        for (int m = 0; m <= 3; m++)
            for (long l = -4; l <= 4; l++)
                CHECK(abs(trig_monomial_mode(k, m, l) - oracle(k, m, l)) < eps);
}

TEST_CASE("dft reality symmetry") {
    PrecisionGuard g(128);
    std::vector<Real> samples;
    int n = 16;
    for (int j = 0; j < n; j++) {
        Real th = 2 * pi() * j / n;
        samples.push_back(1 + cos(th) / 2 - 3 * sin(2 * th));
    }
    FourierSeries fs = dft_modes(samples, 4);
    CHECK(fs.reality_defect() < ldexp(Real(1), -110));
    CHECK(abs(fs.mode(1) - Cplx(Real(1) / 4)) < ldexp(Real(1), -110));
    CHECK(abs(fs.mode(2) - Cplx(Real(0), Real(3) / 2)) < ldexp(Real(1), -110));
}

TEST_CASE("solve3 and saddle-focus eigen decomposition") {
    PrecisionGuard g(192);
    Real eps = ldexp(Real(1), -150);
    Mat3 a;
    a[0] = {Real(1), Real(10), Real(0)};
    a[1] = {Real(-10), Real(1), Real(0)};
    a[2] = {Real(0), Real("0.5"), Real(-2)};
    Vec3 b{Real(1), Real(2), Real(3)};
    Vec3 x = solve3(a, b);
    Vec3 r = mat_vec(a, x) - b;
    CHECK(norm_inf(r) < eps);

    Eigen3 e = eigen_saddle_focus(a);
    CHECK(abs(e.real_eigenvalue + 2) < eps);
    CHECK(abs(e.complex_eigenvalue.re - 1) < eps);
    CHECK(abs(e.complex_eigenvalue.im - 10) < eps);
    // eigenvector residuals
    {
        Vec3 av = mat_vec(a, e.real_eigenvector);
        Vec3 lv = e.real_eigenvalue * e.real_eigenvector;
        CHECK(norm_inf(av - lv) < eps);
    }
    {
        CVec3 v = e.complex_eigenvector;
        for (int i = 0; i < 3; i++) {
            Cplx acc;
            for (int j = 0; j < 3; j++) acc += Cplx(a[i][j]) * v[j];
            CHECK(abs(acc - e.complex_eigenvalue * v[i]) < eps);
        }
    }
}
