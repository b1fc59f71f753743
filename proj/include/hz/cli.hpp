#pragma once

// Batch front end: command implementations behind the hzlab binary.
// Each command reads the RunConfig, orchestrates the library, caches
// expensive results keyed by content hash, and emits deterministic CSV.

#include "hz/config.hpp"

#include <iosfwd>
#include <string>

namespace hz {

struct CliOverrides {
    std::string out_dir;       // empty: keep config value
    unsigned precision = 0;    // 0: keep config value
    int jobs = 1;
    bool no_cache = false;
};

void apply_overrides(RunConfig& cfg, const CliOverrides& ov);

int cmd_check_config(const RunConfig& cfg, std::ostream& log);
int cmd_integrals(const RunConfig& cfg, std::ostream& log);
int cmd_melnikov(const RunConfig& cfg, std::ostream& log);
int cmd_splitting(const RunConfig& cfg, int jobs, std::ostream& log);
int cmd_report(const RunConfig& cfg, std::ostream& log);

// canonical strings used as cache keys (exposed for tests)
std::string canonical_system(const ModelSpec& spec, const PerturbationSeries& series);
std::string splitting_cache_key(const RunConfig& cfg, const Real& delta, const Real& sigma,
                                unsigned precision_bits);

// the effective integrator precision/tolerances the splitting command uses at
// a given delta
ManifoldConfig splitting_manifold_config(const RunConfig& cfg, const Real& delta,
                                         unsigned& bits_out);

}  // namespace hz
