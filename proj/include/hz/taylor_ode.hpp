#pragma once

// Multiprecision integration of the polynomial vector field. Two methods
// behind one stepping interface:
//
//  - variable-order Taylor series (default): the field is polynomial, so the
//    Taylor coefficients of the solution come from exact convolution
//    recurrences; order is picked from the tolerance, the step from the decay
//    of the last coefficients, and each step carries its dense polynomial.
//  - adaptive high-order one-step: Gauss-Legendre collocation with the
//    tableau computed at working precision at runtime, fixed-point stage
//    iteration, and step-doubling error control.

#include "hz/linalg.hpp"
#include "hz/model.hpp"
#include "hz/real.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace hz {

struct IntegratorConfig {
    enum class Method { taylor_series, gauss_collocation };
    Method method = Method::taylor_series;
    Real abs_tol = Real("1e-30");
    Real rel_tol = Real("1e-30");
    unsigned precision_bits = 128;
    long max_steps = 1000000;
    int gauss_stages = 6;
    Real max_step{0};  // 0: no cap

    void validate() const {
        if (precision_bits < 53) throw std::invalid_argument("IntegratorConfig: precision_bits");
        Real floor = ldexp(Real(1), -static_cast<long>(precision_bits) + 16);
        if (!(abs_tol >= floor) || !(rel_tol >= floor))
            throw std::invalid_argument(
                "IntegratorConfig: tolerances must be >= 2^(16 - precision_bits)");
        if (gauss_stages < 2 || gauss_stages > 16)
            throw std::invalid_argument("IntegratorConfig: gauss_stages out of range");
    }
};

// sparse polynomial in (x, y, z)
struct PolyMonomial {
    Real coeff;
    int kx, ky, kz;
};
using Poly3 = std::vector<PolyMonomial>;

// the full right-hand side as three sparse polynomials
struct PolyField3 {
    Poly3 comp[3];

    static PolyField3 build(const ModelSpec& spec, const PerturbationSeries& series,
                            const Params& params);
    Vec3 eval(const Vec3& state) const;
    Mat3 jacobian(const Vec3& state) const;
    // d/d(axis) of every component, as polynomials
    PolyField3 derivative(int axis) const;
};

struct StepOutput {
    Real h;       // signed step actually taken
    Vec3 y_end;
    // dense state at t + tau, tau between 0 and h (same sign as h)
    std::function<Vec3(const Real&)> dense;
};

class Stepper {
  public:
    virtual ~Stepper() = default;
    virtual StepOutput step(const Vec3& y, const Real& h_request) = 0;
    virtual Real initial_step(const Vec3& y) const = 0;
};

std::unique_ptr<Stepper> make_stepper(const PolyField3& field, const IntegratorConfig& cfg);

struct IntegrationResult {
    Vec3 state;
    Real t;
    long steps = 0;
    bool event_stop = false;
};

// callback sees each completed step; return false to stop the integration
using StepObserver = std::function<bool(const Real& t_begin, const StepOutput& step)>;

// integrate from state0 over [0, t_final] (t_final may be negative); throws
// on step-count exhaustion and on blow-up (|state| > 1e3)
IntegrationResult integrate(const PolyField3& field, const IntegratorConfig& cfg, Vec3 state0,
                            const Real& t_final, const StepObserver& observer = {});

IntegrationResult integrate(const ModelSpec& spec, const PerturbationSeries& series,
                            const Params& params, const IntegratorConfig& cfg,
                            const StateCartesian& state0, const Real& t_final,
                            const StepObserver& observer = {});

// flow Jacobian d phi_t / d y0 alongside the trajectory (Taylor method),
// for the volume-preservation diagnostics
struct VariationalResult {
    Vec3 state;
    Mat3 monodromy;
    long steps = 0;
};
VariationalResult integrate_variational(const PolyField3& field, const IntegratorConfig& cfg,
                                        Vec3 state0, const Real& t_final);

}  // namespace hz
