#pragma once

// Shared benchmark systems used across the test suites.
//
//  - system_c: conservative, d = b = alpha0 = 1, c = 0, f = x^2 z,
//    h = -x z^2. Divergence free with broken rotational symmetry, so the
//    splitting prefactor is nonzero.
//  - system_d: dissipative, h = z^3 only. Rotationally symmetric: every
//    theta-mode of the forcing with l != 0 vanishes identically, which makes
//    it the right benchmark for the average/sigma* machinery but useless for
//    mode-1 laws.
//  - system_d1: system_d plus the symmetry-breaking f = x^2 z term; used
//    where a dissipative system with nonzero mode-1 content is required.
//  - system_r: conservative and rotationally symmetric (f = x z^2, g = y z^2,
//    h = -(2/3) z^3); its Melnikov average vanishes through a genuine
//    cancellation and its Borel constant is exactly zero.

#include "hz/model.hpp"

namespace hz::testsys {

struct System {
    ModelSpec spec;
    PerturbationSeries series;
};

inline System system_c() {
    System s;
    s.spec.alpha0 = 1;
    s.spec.b = 1;
    s.spec.c = 0;
    s.spec.d = 1;
    s.spec.p = 0;
    s.spec.conservative = true;
    s.series.add_f(3, 2, 0, 1, Real(1));
    s.series.add_h(3, 1, 0, 2, Real(-1));
    return s;
}

inline System system_d() {
    System s;
    s.spec.alpha0 = 1;
    s.spec.b = 1;
    s.spec.c = 0;
    s.spec.d = 1;
    s.spec.p = 0;
    s.spec.conservative = false;
    s.spec.h3 = 1;
    s.series.add_h(3, 0, 0, 3, Real(1));
    return s;
}

inline System system_d1() {
    System s = system_d();
    s.series.add_f(3, 2, 0, 1, Real(1));
    return s;
}

inline System system_r() {
    System s;
    s.spec.alpha0 = 1;
    s.spec.b = 1;
    s.spec.c = 0;
    s.spec.d = 1;
    s.spec.p = 0;
    s.spec.conservative = true;
    s.series.add_f(3, 1, 0, 2, Real(1));
    s.series.add_g(3, 0, 1, 2, Real(1));
    s.series.add_h(3, 0, 0, 3, Real(-2) / 3);
    return s;
}

}  // namespace hz::testsys
