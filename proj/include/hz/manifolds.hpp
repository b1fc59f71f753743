#pragma once

// Measuring the actual splitting: seed the two-dimensional unstable/stable
// manifolds from the saddle-focus eigenplanes (with the quadratic
// normal-bundle correction), shoot to the section z = Z0(u_section) matching
// the angle by Newton on the seed angle, and Fourier-analyze the radius gap
// Delta(u, theta) = r^u - r^s.

#include "hz/fourier.hpp"
#include "hz/model.hpp"
#include "hz/taylor_ode.hpp"

#include <optional>
#include <vector>

namespace hz {

enum class ManifoldSide { unstable_of_s_minus, stable_of_s_plus };

struct ManifoldConfig {
    IntegratorConfig integrator;
    Real seed_rho = Real("1e-3");
    Real theta_match_tol = Real("1e-18");
    Real time_horizon{0};       // 0: automatic from seed_rho and the spectrum
    int max_newton_iters = 24;

    void validate() const {
        integrator.validate();
        if (!(seed_rho > 0) || seed_rho > Real(1) / 10)
            throw std::invalid_argument("ManifoldConfig: seed_rho out of range");
    }
};

struct SectionCrossing {
    Real theta_at_section;      // in [0, 2 pi)
    Real r_at_section;          // symplectic radius (x^2 + y^2)/2
    Real crossing_time;
    Real refinement_residual;   // |z - Z0(u_section)| after refinement
    Real seed_angle;
};

struct SplittingSample {
    Real delta, sigma, u_section;
    FourierSeries delta_modes;  // modes of Delta(u, .)
    FourierSeries D_modes;      // modes of the true distance sqrt(2 r^u) - sqrt(2 r^s)
    std::vector<Real> delta_values;  // raw Delta at the equispaced angles
    Real seed_radius;
    Real error_budget;
    bool trusted = false;
};

// Seeds on the invariant eigenplane circle of radius rho, corrected by the
// quadratic term of the manifold jet so the distance to the true manifold is
// O(rho^3); usable at arbitrary angle for the shooting Newton.
class ManifoldSeeder {
  public:
    ManifoldSeeder(const ModelSpec& spec, const PerturbationSeries& series, const Params& params,
                   ManifoldSide side, Real rho);

    StateCartesian seed(const Real& angle) const;
    const CriticalPoint& base_point() const { return base_; }
    ManifoldSide side() const { return side_; }
    const Real& rho() const { return rho_; }

  private:
    CriticalPoint base_;
    ManifoldSide side_;
    Real rho_;
    Vec3 plane_e1_, plane_e2_;    // orthonormal basis of the eigenplane
    CVec3 eigvec_;                // complex eigenvector
    CVec3 h20_;                   // quadratic jet coefficients
    Vec3 h11_;
    // maps the in-plane displacement back to the complex coordinate
    Real m11_, m12_, m21_, m22_;  // 2x2 system cache
};

std::vector<StateCartesian> seed_manifold(const ModelSpec& spec,
                                          const PerturbationSeries& series, const Params& params,
                                          ManifoldSide side, const Real& rho, int n_angles);

SectionCrossing shoot_to_section(const ModelSpec& spec, const PerturbationSeries& series,
                                 const Params& params, const ManifoldSeeder& seeder,
                                 const Real& seed_angle, const Real& u_section,
                                 const ManifoldConfig& cfg);

std::vector<SectionCrossing> section_radius(const ModelSpec& spec,
                                            const PerturbationSeries& series,
                                            const Params& params, ManifoldSide side,
                                            const Real& u_section,
                                            const std::vector<Real>& theta_targets,
                                            const ManifoldConfig& cfg);

SplittingSample splitting(const ModelSpec& spec, const PerturbationSeries& series,
                          const Params& params, const Real& u_section, int n_theta,
                          const ManifoldConfig& cfg);

// Prop-style sanity bound: max |Delta| <= cosh^{2/d}(du) (|Upsilon^0| +
// M delta^{p-2/d} kappa^{-3-2/d} e^{-alpha pi/(2 d delta) + alpha kappa}).
bool sharp_bound_check(const ModelSpec& spec, const Params& params, const SplittingSample& sample,
                       const Real& upsilon0_abs, const Real& kappa, const Real& M = Real(1000));

}  // namespace hz
