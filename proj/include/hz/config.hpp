#pragma once

// Run configuration: a single JSON document carrying the model, the
// perturbation tables, and the command parameters. Numeric values are
// accepted as decimal strings (preferred: they parse straight into the
// working precision with no double rounding) or as JSON numbers.

#include "hz/analysis.hpp"
#include "hz/manifolds.hpp"
#include "hz/model.hpp"
#include "hz/special.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace hz {

struct IntegralsLattice {
    std::vector<int> n{0, 1};
    std::vector<Real> Q;
    std::vector<Real> C;
    std::vector<Real> omega;
    std::vector<Real> d;
};

struct RunConfig {
    ModelSpec model;
    PerturbationSeries series;

    std::vector<Real> delta_ladder;
    SigmaMode sigma_mode = SigmaMode::zero;
    Real sigma_fixed{0};
    Real u_section{0};
    int n_theta = 8;
    long mode_range = 2;  // melnikov command emits l in [-mode_range, mode_range]

    ScalarConfig scalar;
    ManifoldConfig manifold;
    bool auto_precision = true;  // per-delta ladder for the splitting command

    IntegralsLattice lattice;

    // report gates
    Real ratio_gate_coarse = Real(3) / 10;
    Real ratio_gate_fine = Real(3) / 20;
    Real phase_gate = Real(3) / 10;
    Real rate_gate = Real(1) / 50;
    Real power_gate = Real(3) / 10;

    std::string output_dir = "out";
    bool cache_enabled = true;
};

// precision ladder for splitting measurements: e^{-alpha pi/(2 d delta)}
// must stay far above the roundoff floor
unsigned splitting_precision_for_delta(const Real& delta);

RunConfig load_config(const std::string& path);
RunConfig parse_config(const nlohmann::json& doc);

}  // namespace hz
