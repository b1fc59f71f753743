#pragma once

// Fits measured splitting data to the exponential law
//   log |mode 1|(delta) = log_prefactor + power log delta - rate / delta,
// compares measured splitting against the Melnikov and Borel-constant
// routes, and applies the L0 phase correction.

#include "hz/manifolds.hpp"
#include "hz/melnikov.hpp"
#include "hz/model.hpp"

#include <vector>

namespace hz {

struct FitResult {
    Real rate;            // coefficient of 1/delta
    Real power;           // coefficient of log delta
    Real log_prefactor;
    Real rate_constrained;           // second fit with power pinned at p - 2/d
    Real log_prefactor_constrained;
    std::vector<Real> residuals;
    Real residual_rms;
    Real condition_estimate;
    Real rate_uncertainty, power_uncertainty, prefactor_uncertainty;
};

FitResult fit_exponential_law(const std::vector<SplittingSample>& samples,
                              const ModelSpec& spec);

enum class SigmaMode { zero, star, fixed };

struct ComparisonRow {
    Real delta, sigma;
    bool trusted;
    Cplx measured_mode1;
    Real measured_budget;
    Cplx melnikov_mode1;       // quadrature route prediction at the section
    Real melnikov_err;
    Cplx asymptotic_mode1;     // Borel-constant route prediction
    Real measured_avg;         // mode 0 of the measured splitting
    Real ratio_melnikov;       // |measured| / |melnikov|
    Real ratio_asymptotic;
    Real phase_gap_melnikov;   // |principal arg difference|
    Real phase_gap_melnikov_L0;
    Real phase_gap_asymptotic;
    Real phase_gap_asymptotic_L0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    Real L0;
    BorelConstant borel;
    bool melnikov_deviation_shrinks = false;  // |ratio-1| monotone down the ladder
};

// prediction of the measured Delta mode-1 at the section from a Upsilon
// constant: cosh^{2/d}(du) e^{i(alpha u/delta + c/d log cosh(du))} Upsilon
Cplx mode1_prediction_at_section(const ModelSpec& spec, const Params& params, const Real& u,
                                 const Cplx& upsilon1);

ComparisonReport compare_routes(const ModelSpec& spec, const PerturbationSeries& series,
                                const std::vector<SplittingSample>& samples,
                                const ScalarConfig& scfg);

// orchestrating variant: measures the ladder itself (no caching)
ComparisonReport compare_routes(const ModelSpec& spec, const PerturbationSeries& series,
                                const std::vector<Real>& delta_ladder, SigmaMode sigma_mode,
                                const Real& sigma_fixed, const Real& u_section, int n_theta,
                                const ManifoldConfig& mcfg, const ScalarConfig& scfg);

}  // namespace hz
