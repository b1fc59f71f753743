#pragma once

// A concrete unfolding of the Hopf-zero singularity in scaled coordinates:
//
//   dx/dt = x(sigma - d z) + (alpha/delta + c z) y + delta^p f(dx,dy,dz,delta)
//   dy/dt = -(alpha/delta + c z) x + y(sigma - d z) + delta^p g(...)
//   dz/dt = -1 + b(x^2 + y^2) + z^2 + delta^p h(...)
//
// with f, g, h given by Taylor tables  f = sum_q delta^q sum_{k+m+n<=q}
// f_qkmn x^k y^m z^n  (coefficients taken at sigma = 0). The module also
// carries the unperturbed heteroclinic sphere, the saddle-focus critical
// points, the forcing that drives the Melnikov machinery, and the constant
// L0 entering the splitting phase correction.

#include "hz/complex.hpp"
#include "hz/errors.hpp"
#include "hz/fourier.hpp"
#include "hz/linalg.hpp"
#include "hz/real.hpp"

#include <map>
#include <stdexcept>
#include <vector>

namespace hz {

struct ModelSpec {
    Real alpha0{1};  // frequency at the singularity, > 0
    Real alpha1{0};
    Real alpha2{0};
    Real b{1};  // > 0
    Real c{0};  // >= 0
    Real d{1};  // > 0; equals 1 in the conservative case
    Real p{0};  // regularity exponent, >= -2
    Real h3{0}; // z^3 coefficient of the unscaled h on the axis; only used
                // when converting back to unfolding variables
    bool conservative = false;

    void validate() const {
        if (!(alpha0 > 0)) throw std::invalid_argument("ModelSpec: alpha0 must be positive");
        if (!(b > 0)) throw std::invalid_argument("ModelSpec: b must be positive");
        if (!(d > 0)) throw std::invalid_argument("ModelSpec: d must be positive");
        if (c < 0) throw std::invalid_argument("ModelSpec: c must be nonnegative");
        if (p < -2) throw std::invalid_argument("ModelSpec: p must be >= -2");
        if (conservative && d != 1)
            throw std::invalid_argument("ModelSpec: conservative systems require d = 1");
    }
};

struct PerturbationSeries {
    struct Term {
        int q, k, m, n;
        Real coeff;
    };
    std::vector<Term> f, g, h;
    int qmax = 6;

    static void check_term(int q, int k, int m, int n) {
        if (q < 3) throw std::invalid_argument("PerturbationSeries: q must be >= 3");
        if (k < 0 || m < 0 || n < 0) throw std::invalid_argument("PerturbationSeries: negative index");
        if (k + m + n > q) throw std::invalid_argument("PerturbationSeries: k+m+n must be <= q");
    }
    void add_f(int q, int k, int m, int n, Real c) { check_term(q, k, m, n); f.push_back({q, k, m, n, std::move(c)}); }
    void add_g(int q, int k, int m, int n, Real c) { check_term(q, k, m, n); g.push_back({q, k, m, n, std::move(c)}); }
    void add_h(int q, int k, int m, int n, Real c) { check_term(q, k, m, n); h.push_back({q, k, m, n, std::move(c)}); }
    bool empty() const { return f.empty() && g.empty() && h.empty(); }
};

struct Params {
    Real delta;
    Real sigma;
    Real alpha;  // alpha0 + alpha1*delta*sigma + alpha2*delta^2

    // sigma_cap is the sigma^* of the admissible regime |sigma| <= sigma^* delta^{p+3}
    static Params make(const ModelSpec& spec, Real delta, Real sigma, const Real& sigma_cap = Real(100)) {
        if (!(delta > 0)) throw std::invalid_argument("Params: delta must be positive");
        if (abs(sigma) > sigma_cap * pow(delta, spec.p + 3))
            throw std::invalid_argument("Params: |sigma| exceeds sigma_cap * delta^(p+3)");
        Params out;
        out.delta = delta;
        out.sigma = sigma;
        out.alpha = spec.alpha0 + spec.alpha1 * delta * sigma + spec.alpha2 * delta * delta;
        if (!(out.alpha > 0)) throw std::invalid_argument("Params: derived alpha must be positive");
        return out;
    }
};

struct StateCartesian {
    Real x, y, z;
};

struct StateCylindric {
    Real r, theta, z;  // symplectic radius r = (x^2 + y^2)/2
};

inline StateCartesian to_cartesian(const StateCylindric& s) {
    if (s.r < 0) throw std::domain_error("to_cartesian: negative radius");
    Real rho = sqrt(2 * s.r);
    return {rho * cos(s.theta), rho * sin(s.theta), s.z};
}

inline StateCylindric to_cylindric(const StateCartesian& s) {
    return {(s.x * s.x + s.y * s.y) / 2, atan2(s.y, s.x), s.z};
}

struct CylindricVelocity {
    Real dr, dtheta, dz;
    Real F, G, H;  // perturbation components in the cylindric frame
};

struct Heteroclinic {
    Real R0, Theta0, Z0;
};

struct CriticalPoint {
    StateCartesian point;
    Vec3 residual;
    Mat3 jacobian;
    Eigen3 eigen;
    Real distance_to_unperturbed;  // | S - (0,0,+-1) |
};

struct CriticalPoints {
    CriticalPoint s_minus;  // near (0,0,-1)
    CriticalPoint s_plus;   // near (0,0,+1)
};

// One additive term of a theta-Fourier mode of the forcing F(0):
//   coeff * sech^sech_pow(d u) * tanh^tanh_pow(d u)
struct ForcingModeTerm {
    Cplx coeff;
    int sech_pow;
    int tanh_pow;
};

struct UnfoldingScaling {
    Real delta, sigma, p;
    Real z_shift;  // delta^{p+3} h3 / 2, recorded for round trips
};

Vec3 eval_field_cartesian(const ModelSpec& spec, const PerturbationSeries& series,
                          const Params& params, const StateCartesian& state);

Mat3 field_jacobian_cartesian(const ModelSpec& spec, const PerturbationSeries& series,
                              const Params& params, const StateCartesian& state);

CylindricVelocity eval_field_cylindric(const ModelSpec& spec, const PerturbationSeries& series,
                                       const Params& params, const StateCylindric& state);

Heteroclinic heteroclinic(const ModelSpec& spec, const Params& params, const Real& u,
                          const Real& theta0);

CriticalPoints critical_points(const ModelSpec& spec, const PerturbationSeries& series,
                               const Params& params, const Real& tol);

// Pointwise forcing F(0)(u,theta) = 2 sigma R0 + delta^p F(0)
//                                   + delta^p (d+1)/b Z0 H(0)
Real forcing_F0(const ModelSpec& spec, const PerturbationSeries& series, const Params& params,
                const Real& u, const Real& theta);

// Terms of the l-th theta-mode of the forcing, as functions of sech(d u),
// tanh(d u). Valid for complex u as well (the melnikov module evaluates them
// on the shifted contour).
std::vector<ForcingModeTerm> forcing_mode_terms(const ModelSpec& spec,
                                                const PerturbationSeries& series,
                                                const Params& params, long l);

FourierSeries forcing_F0_fourier(const ModelSpec& spec, const PerturbationSeries& series,
                                 const Params& params, const Real& u, long max_mode);

Real L0_constant(const ModelSpec& spec, const PerturbationSeries& series);

// Exact coefficients of d/dx f + d/dy g + d/dz h per homogeneity class q,
// keyed by (q, k, m, n). Zero map iff the perturbation is divergence free
// up to the requested degree.
std::map<std::array<int, 4>, Real> divergence_coefficients(const PerturbationSeries& series,
                                                           int degree);

Real divergence_check(const PerturbationSeries& series, int degree);

UnfoldingScaling scale_from_unfolding(const ModelSpec& spec, const Real& mu, const Real& nu,
                                      const Real& q);

}  // namespace hz
