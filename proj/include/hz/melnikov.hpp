#pragma once

// The Melnikov function adapted to the Hopf-zero heteroclinic surface,
//
//   M(u,theta) = cosh^{2/d}(d u) int_R F(0)(w, theta - (eta(w)-eta(u))/delta)
//                                      / cosh^{2/d}(d w) dw,
//   eta(w) = alpha w + delta c/d log cosh(d w),
//
// its Fourier constants Upsilon_0^(l) (two independent routes), the Borel
// splitting constant C = C1 - i C2, the averages I and J with the
// zero-average curve sigma*(delta), and the graph parameterizations r10.

#include "hz/fourier.hpp"
#include "hz/model.hpp"
#include "hz/quadrature.hpp"
#include "hz/special.hpp"

#include <map>

namespace hz {

enum class UpsilonRoute { quadrature, gamma_series };

struct MelnikovResult {
    FourierSeries upsilon0;                 // constants Upsilon_0^(l)
    UpsilonRoute route = UpsilonRoute::quadrature;
    Real delta, sigma;
    std::map<long, Real> error_estimate;    // per mode
};

struct BorelConstant {
    Real C1, C2;                  // C = C1 - i C2
    Cplx mhat1_at_alpha_over_d;
    long series_terms_used = 0;
    Real truncation_bound{0};     // 0: the Taylor table is finite

    Cplx C() const { return Cplx(C1, -C2); }
};

struct AverageIJ {
    Real I;  // (d+1)/b int sech^{2/d+2}
    Real J;  // delta^-3 int [mode-0 forcing without the sigma term] sech^{2/d}
};

enum class ManifoldBranch { unstable, stable };

// eta(w)/delta phase used across the module
Real melnikov_phase(const ModelSpec& spec, const Params& params, const Real& w);

Real melnikov_pointwise(const ModelSpec& spec, const PerturbationSeries& series,
                        const Params& params, const Real& u, const Real& theta,
                        const ScalarConfig& cfg);

QuadratureResult upsilon0_quadrature(const ModelSpec& spec, const PerturbationSeries& series,
                                     const Params& params, long l, const ScalarConfig& cfg);

// Finite Gamma-series route for l = +-1 (Beta closed form plus the (n,Q)
// recurrence); exact given the Gamma values.
Cplx upsilon0_gamma_series(const ModelSpec& spec, const PerturbationSeries& series,
                           const Params& params, long l, const ScalarConfig& cfg);

// Collects modes |l| <= max_mode. The gamma_series route fills l = -1, 0, +1
// only (the series decomposition is stated for the first harmonics; the
// average still goes through quadrature).
MelnikovResult melnikov_coefficients(const ModelSpec& spec, const PerturbationSeries& series,
                                     const Params& params, long max_mode, const ScalarConfig& cfg,
                                     UpsilonRoute route = UpsilonRoute::quadrature);

BorelConstant borel_constant(const ModelSpec& spec, const PerturbationSeries& series,
                             const ScalarConfig& cfg);

Real melnikov_asymptotic(const ModelSpec& spec, const PerturbationSeries& series,
                         const Params& params, const Real& u, const Real& theta,
                         const ScalarConfig& cfg);

// Leading oscillatory amplitude of the asymptotic law,
// delta^{p - 2/d - i c/d} e^{-alpha pi/(2 d delta)} C/2; the measured and
// quadrature mode-1 values are compared against it.
Cplx upsilon1_asymptotic_value(const ModelSpec& spec, const Params& params,
                               const BorelConstant& borel);

AverageIJ average_IJ(const ModelSpec& spec, const PerturbationSeries& series,
                     const Params& params, const ScalarConfig& cfg);

// Root of Upsilon_0^(0)(delta, .) seeded at -(J/I) delta^{p+3}; dissipative
// systems only.
Real sigma_star(const ModelSpec& spec, const PerturbationSeries& series, const Real& delta,
                const ScalarConfig& cfg);

// Half-line mode integrals K_l(u) = int_{-+inf}^{u} e^{-il eta(w)/delta}
// F^(l)(0)(w) sech^{2/d}(d w) dw for l = 0..max_mode (negative modes by
// conjugation); r10 is assembled from them.
std::map<long, Cplx> r10_mode_integrals(const ModelSpec& spec, const PerturbationSeries& series,
                                        const Params& params, ManifoldBranch branch,
                                        const Real& u, long max_mode, const ScalarConfig& cfg);

Real r10_graph(const ModelSpec& spec, const PerturbationSeries& series, const Params& params,
               ManifoldBranch branch, const Real& u, const Real& theta, const ScalarConfig& cfg);

// Largest |l| with any nonzero forcing mode (the forcing is a trigonometric
// polynomial, so this is finite and small).
long forcing_mode_cutoff(const PerturbationSeries& series);

// cosh^{2/d}(d u) Upsilon e^{il(theta + alpha u/delta + c/d log cosh(d u))}
// summed over modes: reconstructs M from coefficients.
Real melnikov_from_modes(const ModelSpec& spec, const Params& params, const FourierSeries& ups,
                         const Real& u, const Real& theta);

}  // namespace hz
