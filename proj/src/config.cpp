#include "hz/config.hpp"

#include <fstream>
#include <set>

namespace hz {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& path) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) fail(path + "." + key, "unknown key");
}

Real get_real(const json& v, const std::string& path) {
    try {
        if (v.is_string()) return parse_real(v.get<std::string>());
        if (v.is_number_integer()) return Real(v.get<long long>());
        if (v.is_number_float()) return parse_real(v.dump());
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    fail(path, "expected a number or a decimal string");
}

Real get_real(const json& obj, const std::string& key, const std::string& path,
              const Real& fallback) {
    if (!obj.contains(key)) return fallback;
    return get_real(obj.at(key), path + "." + key);
}

std::vector<Real> get_real_list(const json& obj, const std::string& key,
                                const std::string& path) {
    std::vector<Real> out;
    if (!obj.contains(key)) return out;
    const json& arr = obj.at(key);
    if (!arr.is_array()) fail(path + "." + key, "expected an array");
    for (std::size_t i = 0; i < arr.size(); i++)
        out.push_back(get_real(arr[i], path + "." + key + "[" + std::to_string(i) + "]"));
    return out;
}

void parse_terms(const json& arr, const std::string& path,
                 void (PerturbationSeries::*add)(int, int, int, int, Real),
                 PerturbationSeries& series) {
    if (!arr.is_array()) fail(path, "expected an array of term objects");
    for (std::size_t i = 0; i < arr.size(); i++) {
        const json& t = arr[i];
        std::string tp = path + "[" + std::to_string(i) + "]";
        if (!t.is_object()) fail(tp, "expected an object {q,k,m,n,coeff}");
        reject_unknown(t, {"q", "k", "m", "n", "coeff"}, tp);
        for (const char* key : {"q", "k", "m", "n", "coeff"})
            if (!t.contains(key)) fail(tp, std::string("missing key ") + key);
        try {
            (series.*add)(t.at("q").get<int>(), t.at("k").get<int>(), t.at("m").get<int>(),
                          t.at("n").get<int>(), get_real(t.at("coeff"), tp + ".coeff"));
        } catch (const std::invalid_argument& e) {
            fail(tp, e.what());
        }
    }
}

}  // namespace

unsigned splitting_precision_for_delta(const Real& delta) {
    if (delta >= Real(3) / 20) return 128;
    if (delta >= Real(7) / 100) return 256;
    return 512;
}

RunConfig parse_config(const json& doc) {
    // parse every numeric value well above any working precision used
    // downstream (the auto ladder tops out at 512 bits + guards); kernels
    // re-round to their working precision on entry
    PrecisionGuard guard(kParsePrecisionBits);
    if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");
    reject_unknown(doc, {"version", "model", "perturbation", "run", "output_dir", "cache"},
                   "$");
    if (!doc.contains("version") || doc.at("version").get<int>() != 1)
        throw std::invalid_argument("config: $.version: expected 1");

    RunConfig cfg;

    const json& model = doc.at("model");
    reject_unknown(model,
                   {"alpha0", "alpha1", "alpha2", "b", "c", "d", "p", "h3", "conservative"},
                   "$.model");
    cfg.model.alpha0 = get_real(model, "alpha0", "$.model", Real(1));
    cfg.model.alpha1 = get_real(model, "alpha1", "$.model", Real(0));
    cfg.model.alpha2 = get_real(model, "alpha2", "$.model", Real(0));
    cfg.model.b = get_real(model, "b", "$.model", Real(1));
    cfg.model.c = get_real(model, "c", "$.model", Real(0));
    cfg.model.d = get_real(model, "d", "$.model", Real(1));
    cfg.model.p = get_real(model, "p", "$.model", Real(0));
    cfg.model.h3 = get_real(model, "h3", "$.model", Real(0));
    if (model.contains("conservative")) cfg.model.conservative = model.at("conservative").get<bool>();
    try {
        cfg.model.validate();
    } catch (const std::invalid_argument& e) {
        fail("$.model", e.what());
    }

    if (doc.contains("perturbation")) {
        const json& pert = doc.at("perturbation");
        reject_unknown(pert, {"qmax", "f", "g", "h"}, "$.perturbation");
        if (pert.contains("qmax")) cfg.series.qmax = pert.at("qmax").get<int>();
        if (pert.contains("f"))
            parse_terms(pert.at("f"), "$.perturbation.f", &PerturbationSeries::add_f, cfg.series);
        if (pert.contains("g"))
            parse_terms(pert.at("g"), "$.perturbation.g", &PerturbationSeries::add_g, cfg.series);
        if (pert.contains("h"))
            parse_terms(pert.at("h"), "$.perturbation.h", &PerturbationSeries::add_h, cfg.series);
        for (const auto& table : {cfg.series.f, cfg.series.g, cfg.series.h})
            for (const auto& t : table)
                if (t.q > cfg.series.qmax) fail("$.perturbation", "term exceeds qmax");
    }
    if (cfg.model.conservative && divergence_check(cfg.series, cfg.series.qmax) != 0)
        fail("$.model.conservative", "perturbation tables are not divergence free");

    if (doc.contains("run")) {
        const json& run = doc.at("run");
        reject_unknown(run,
                       {"delta_ladder", "sigma_mode", "u_section", "n_theta", "mode_range",
                        "precision_bits", "quadrature_rel_tol", "contour_shift_rho", "integrator",
                        "seed_rho", "lattice", "report_gates"},
                       "$.run");
        cfg.delta_ladder = get_real_list(run, "delta_ladder", "$.run");
        for (const Real& d : cfg.delta_ladder)
            if (!(d > 0)) fail("$.run.delta_ladder", "delta must be positive");
        if (run.contains("sigma_mode")) {
            std::string mode = run.at("sigma_mode").get<std::string>();
            if (mode == "zero") {
                cfg.sigma_mode = SigmaMode::zero;
            } else if (mode == "sigma_star") {
                cfg.sigma_mode = SigmaMode::star;
            } else if (mode.rfind("fixed:", 0) == 0) {
                cfg.sigma_mode = SigmaMode::fixed;
                cfg.sigma_fixed = parse_real(mode.substr(6));
            } else {
                fail("$.run.sigma_mode", "expected zero | sigma_star | fixed:VALUE");
            }
        }
        cfg.u_section = get_real(run, "u_section", "$.run", Real(0));
        if (run.contains("n_theta")) cfg.n_theta = run.at("n_theta").get<int>();
        if (cfg.n_theta < 4) fail("$.run.n_theta", "need at least 4 angles");
        if (run.contains("mode_range")) cfg.mode_range = run.at("mode_range").get<long>();
        if (run.contains("precision_bits")) {
            cfg.scalar.precision_bits = run.at("precision_bits").get<unsigned>();
            cfg.manifold.integrator.precision_bits = cfg.scalar.precision_bits;
            cfg.auto_precision = false;
        }
        cfg.scalar.quadrature_rel_tol =
            get_real(run, "quadrature_rel_tol", "$.run", cfg.scalar.quadrature_rel_tol);
        cfg.scalar.contour_shift_rho =
            get_real(run, "contour_shift_rho", "$.run", cfg.scalar.contour_shift_rho);
        if (run.contains("integrator")) {
            const json& integ = run.at("integrator");
            reject_unknown(integ, {"method", "abs_tol", "rel_tol", "max_steps", "gauss_stages"},
                           "$.run.integrator");
            if (integ.contains("method")) {
                std::string m = integ.at("method").get<std::string>();
                if (m == "taylor_series") {
                    cfg.manifold.integrator.method = IntegratorConfig::Method::taylor_series;
                } else if (m == "gauss_collocation") {
                    cfg.manifold.integrator.method = IntegratorConfig::Method::gauss_collocation;
                } else {
                    fail("$.run.integrator.method", "expected taylor_series | gauss_collocation");
                }
            }
            cfg.manifold.integrator.abs_tol =
                get_real(integ, "abs_tol", "$.run.integrator", cfg.manifold.integrator.abs_tol);
            cfg.manifold.integrator.rel_tol =
                get_real(integ, "rel_tol", "$.run.integrator", cfg.manifold.integrator.rel_tol);
            if (integ.contains("max_steps"))
                cfg.manifold.integrator.max_steps = integ.at("max_steps").get<long>();
            if (integ.contains("gauss_stages"))
                cfg.manifold.integrator.gauss_stages = integ.at("gauss_stages").get<int>();
        }
        cfg.manifold.seed_rho = get_real(run, "seed_rho", "$.run", cfg.manifold.seed_rho);
        if (run.contains("lattice")) {
            const json& lat = run.at("lattice");
            reject_unknown(lat, {"n", "Q", "C", "omega", "d"}, "$.run.lattice");
            cfg.lattice.n.clear();
            if (lat.contains("n"))
                for (const auto& v : lat.at("n")) cfg.lattice.n.push_back(v.get<int>());
            cfg.lattice.Q = get_real_list(lat, "Q", "$.run.lattice");
            cfg.lattice.C = get_real_list(lat, "C", "$.run.lattice");
            cfg.lattice.omega = get_real_list(lat, "omega", "$.run.lattice");
            cfg.lattice.d = get_real_list(lat, "d", "$.run.lattice");
        } else {
            cfg.lattice.Q = {Real(2), Real(3)};
            cfg.lattice.C = {Real(0), Real(1)};
            cfg.lattice.omega = {Real(10), Real(20), Real(40)};
            cfg.lattice.d = {Real(1)};
        }
        if (run.contains("report_gates")) {
            const json& g = run.at("report_gates");
            reject_unknown(g, {"ratio_coarse", "ratio_fine", "phase", "rate", "power"},
                           "$.run.report_gates");
            cfg.ratio_gate_coarse = get_real(g, "ratio_coarse", "$.run.report_gates",
                                             cfg.ratio_gate_coarse);
            cfg.ratio_gate_fine = get_real(g, "ratio_fine", "$.run.report_gates",
                                           cfg.ratio_gate_fine);
            cfg.phase_gate = get_real(g, "phase", "$.run.report_gates", cfg.phase_gate);
            cfg.rate_gate = get_real(g, "rate", "$.run.report_gates", cfg.rate_gate);
            cfg.power_gate = get_real(g, "power", "$.run.report_gates", cfg.power_gate);
        }
    }

    if (!doc.contains("run")) {
        cfg.lattice.Q = {Real(2), Real(3)};
        cfg.lattice.C = {Real(0), Real(1)};
        cfg.lattice.omega = {Real(10), Real(20), Real(40)};
        cfg.lattice.d = {Real(1)};
    }

    if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
    if (doc.contains("cache")) cfg.cache_enabled = doc.at("cache").get<bool>();

    // physical re-checks of the parameter regime happen at Params::make time
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw std::invalid_argument("config: " + path + ": " + e.what());
    }
    return parse_config(doc);
}

}  // namespace hz
