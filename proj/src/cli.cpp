#include "hz/cli.hpp"

#include "hz/cache.hpp"
#include "hz/errors.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace hz {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(const Real& x) { return to_decimal_string(x); }

struct CsvWriter {
    std::ofstream out;
    explicit CsvWriter(const fs::path& path) : out(path) {
        if (!out) throw std::runtime_error("cannot open " + path.string());
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); i++) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    }
};

Real sigma_for(const RunConfig& cfg, const Real& delta) {
    switch (cfg.sigma_mode) {
        case SigmaMode::zero: return Real(0);
        case SigmaMode::fixed: return cfg.sigma_fixed;
        case SigmaMode::star: return sigma_star(cfg.model, cfg.series, delta, cfg.scalar);
    }
    return Real(0);
}

json sample_to_json(const SplittingSample& s) {
    json doc;
    doc["delta"] = num(s.delta);
    doc["sigma"] = num(s.sigma);
    doc["u_section"] = num(s.u_section);
    doc["seed_radius"] = num(s.seed_radius);
    doc["error_budget"] = num(s.error_budget);
    doc["trusted"] = s.trusted;
    json modes = json::array();
    for (const auto& [l, c] : s.delta_modes.modes)
        modes.push_back({l, num(c.re), num(c.im)});
    doc["delta_modes"] = modes;
    json dmodes = json::array();
    for (const auto& [l, c] : s.D_modes.modes) dmodes.push_back({l, num(c.re), num(c.im)});
    doc["D_modes"] = dmodes;
    json values = json::array();
    for (const auto& v : s.delta_values) values.push_back(num(v));
    doc["delta_values"] = values;
    return doc;
}

SplittingSample sample_from_json(const json& doc) {
    PrecisionGuard guard(kParsePrecisionBits);
    SplittingSample s;
    s.delta = parse_real(doc.at("delta").get<std::string>());
    s.sigma = parse_real(doc.at("sigma").get<std::string>());
    s.u_section = parse_real(doc.at("u_section").get<std::string>());
    s.seed_radius = parse_real(doc.at("seed_radius").get<std::string>());
    s.error_budget = parse_real(doc.at("error_budget").get<std::string>());
    s.trusted = doc.at("trusted").get<bool>();
    for (const auto& m : doc.at("delta_modes"))
        s.delta_modes.set_mode(m[0].get<long>(), Cplx(parse_real(m[1].get<std::string>()),
                                                      parse_real(m[2].get<std::string>())));
    for (const auto& m : doc.at("D_modes"))
        s.D_modes.set_mode(m[0].get<long>(), Cplx(parse_real(m[1].get<std::string>()),
                                                  parse_real(m[2].get<std::string>())));
    for (const auto& v : doc.at("delta_values"))
        s.delta_values.push_back(parse_real(v.get<std::string>()));
    return s;
}

Real wrap_pm_pi(Real a) {
    Real two_pi = 2 * pi();
    a = fmod(a, two_pi);
    if (a > pi()) a -= two_pi;
    if (a <= -pi()) a += two_pi;
    return a;
}

}  // namespace

void apply_overrides(RunConfig& cfg, const CliOverrides& ov) {
    if (!ov.out_dir.empty()) cfg.output_dir = ov.out_dir;
    if (ov.precision != 0) {
        cfg.scalar.precision_bits = ov.precision;
        cfg.manifold.integrator.precision_bits = ov.precision;
        cfg.auto_precision = false;
    }
    if (ov.no_cache) cfg.cache_enabled = false;
}

std::string canonical_system(const ModelSpec& spec, const PerturbationSeries& series) {
    std::ostringstream os;
    os << "alpha0=" << num(spec.alpha0) << ";alpha1=" << num(spec.alpha1)
       << ";alpha2=" << num(spec.alpha2) << ";b=" << num(spec.b) << ";c=" << num(spec.c)
       << ";d=" << num(spec.d) << ";p=" << num(spec.p) << ";h3=" << num(spec.h3)
       << ";cons=" << (spec.conservative ? 1 : 0);
    auto dump = [&](const char* tag, std::vector<PerturbationSeries::Term> terms) {
        std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
            return std::tie(a.q, a.k, a.m, a.n) < std::tie(b.q, b.k, b.m, b.n);
        });
        os << ";" << tag << ":";
        for (const auto& t : terms)
            os << t.q << "," << t.k << "," << t.m << "," << t.n << "," << num(t.coeff) << "|";
    };
    dump("f", series.f);
    dump("g", series.g);
    dump("h", series.h);
    return os.str();
}

ManifoldConfig splitting_manifold_config(const RunConfig& cfg, const Real& delta,
                                         unsigned& bits_out) {
    ManifoldConfig m = cfg.manifold;
    if (cfg.auto_precision) {
        bits_out = splitting_precision_for_delta(delta);
        m.integrator.precision_bits = bits_out;
        Real auto_tol = ldexp(Real(1), -static_cast<long>(bits_out) + 44);
        m.integrator.abs_tol = auto_tol;
        m.integrator.rel_tol = auto_tol;
    } else {
        bits_out = m.integrator.precision_bits;
    }
    return m;
}

std::string splitting_cache_key(const RunConfig& cfg, const Real& delta, const Real& sigma,
                                unsigned precision_bits) {
    unsigned bits = precision_bits;
    ManifoldConfig m = splitting_manifold_config(cfg, delta, bits);
    std::ostringstream os;
    os << "splitting/v1;" << canonical_system(cfg.model, cfg.series) << ";delta=" << num(delta)
       << ";sigma=" << num(sigma) << ";u=" << num(cfg.u_section) << ";n_theta=" << cfg.n_theta
       << ";bits=" << bits << ";abs=" << num(m.integrator.abs_tol)
       << ";rel=" << num(m.integrator.rel_tol) << ";rho=" << num(m.seed_rho) << ";method="
       << (m.integrator.method == IntegratorConfig::Method::taylor_series ? "taylor" : "gauss");
    return os.str();
}

int cmd_check_config(const RunConfig& cfg, std::ostream& log) {
    log << "model: alpha0=" << num(cfg.model.alpha0) << " b=" << num(cfg.model.b)
        << " c=" << num(cfg.model.c) << " d=" << num(cfg.model.d) << " p=" << num(cfg.model.p)
        << (cfg.model.conservative ? " conservative" : " dissipative") << "\n";
    log << "perturbation terms: f=" << cfg.series.f.size() << " g=" << cfg.series.g.size()
        << " h=" << cfg.series.h.size() << " (qmax " << cfg.series.qmax << ")\n";
    log << "delta ladder:";
    for (const auto& d : cfg.delta_ladder) log << " " << num(d);
    log << "\nL0 = " << num(L0_constant(cfg.model, cfg.series)) << "\n";
    log << "forcing mode cutoff = " << forcing_mode_cutoff(cfg.series) << "\n";
    return 0;
}

int cmd_integrals(const RunConfig& cfg, std::ostream& log) {
    PrecisionGuard guard(cfg.scalar.precision_bits);
    fs::create_directories(cfg.output_dir);
    CsvWriter csv(fs::path(cfg.output_dir) / "integrals.csv");
    csv.row({"n", "Q", "C", "omega", "d", "quad_re", "quad_im", "series_re", "series_im",
             "asym_re", "asym_im", "gap_quad_series", "gap_quad_asym", "note"});
    long rows = 0, errors = 0;
    for (int n : cfg.lattice.n) {
        for (const Real& Q : cfg.lattice.Q) {
            for (const Real& C : cfg.lattice.C) {
                for (const Real& omega : cfg.lattice.omega) {
                    for (const Real& d : cfg.lattice.d) {
                        if (!(Q + 1 > n)) continue;
                        std::vector<std::string> cells{std::to_string(n), num(Q), num(C),
                                                       num(omega), num(d)};
                        try {
                            IIntegralKey key{n, Q, 1, C, omega, d};
                            auto quad = I_quadrature(key, cfg.scalar);
                            Cplx series = I_series_route(n, Q, C, omega, d);
                            Cplx asym = I_asymptotic(n, Q, C, omega, d);
                            Real scale = abs(series);
                            Real gap_qs = scale > 0 ? abs(quad.value - series) / scale : Real(0);
                            Real gap_qa =
                                abs(asym) > 0 ? abs(quad.value / asym - Cplx(Real(1))) : Real(0);
                            for (const Cplx& v : {quad.value, series, asym}) {
                                cells.push_back(num(v.re));
                                cells.push_back(num(v.im));
                            }
                            cells.push_back(num(gap_qs));
                            cells.push_back(num(gap_qa));
                            cells.push_back("ok");
                        } catch (const accuracy_error& e) {
                            cells.resize(5);
                            cells.insert(cells.end(), 8, "");
                            cells.push_back(std::string("accuracy_error"));
                            errors++;
                        }
                        csv.row(cells);
                        rows++;
                    }
                }
            }
        }
    }
    log << "integrals: " << rows << " rows (" << errors << " rows with accuracy errors)\n";
    return 0;
}

int cmd_melnikov(const RunConfig& cfg, std::ostream& log) {
    PrecisionGuard guard(cfg.scalar.precision_bits);
    fs::create_directories(cfg.output_dir);
    ResultCache cache(fs::path(cfg.output_dir) / "cache", cfg.cache_enabled);
    CsvWriter csv(fs::path(cfg.output_dir) / "melnikov.csv");
    csv.row({"delta", "sigma", "l", "re", "im", "route", "err_estimate"});

    auto borel = borel_constant(cfg.model, cfg.series, cfg.scalar);
    {
        CsvWriter bcsv(fs::path(cfg.output_dir) / "melnikov_borel.csv");
        bcsv.row({"C1", "C2", "mhat1_re", "mhat1_im", "terms", "truncation_bound"});
        bcsv.row({num(borel.C1), num(borel.C2), num(borel.mhat1_at_alpha_over_d.re),
                  num(borel.mhat1_at_alpha_over_d.im), std::to_string(borel.series_terms_used),
                  num(borel.truncation_bound)});
    }

    for (const Real& delta : cfg.delta_ladder) {
        Real sigma = sigma_for(cfg, delta);
        std::ostringstream keys;
        keys << "melnikov/v1;" << canonical_system(cfg.model, cfg.series)
             << ";delta=" << num(delta) << ";sigma=" << num(sigma) << ";L=" << cfg.mode_range
             << ";bits=" << cfg.scalar.precision_bits
             << ";tol=" << num(cfg.scalar.quadrature_rel_tol);
        json rows;
        auto cached = cache.load(keys.str());
        if (cached) {
            rows = *cached;
        } else {
            Params pr = Params::make(cfg.model, delta, sigma);
            rows = json::array();
            for (long l = -cfg.mode_range; l <= cfg.mode_range; l++) {
                auto res = upsilon0_quadrature(cfg.model, cfg.series, pr, l, cfg.scalar);
                rows.push_back({num(delta), num(sigma), std::to_string(l), num(res.value.re),
                                num(res.value.im), "quadrature", num(res.error_estimate)});
            }
            for (long l : {-1L, 1L}) {
                Cplx v = upsilon0_gamma_series(cfg.model, cfg.series, pr, l, cfg.scalar);
                Real err = abs(v) * ldexp(Real(1),
                                          -static_cast<long>(cfg.scalar.precision_bits) + 24);
                rows.push_back({num(delta), num(sigma), std::to_string(l), num(v.re), num(v.im),
                                "gamma_series", num(err)});
            }
            cache.store(keys.str(), rows);
        }
        for (const auto& r : rows) {
            std::vector<std::string> cells;
            for (const auto& c : r) cells.push_back(c.get<std::string>());
            csv.row(cells);
        }
    }
    log << "melnikov: wrote " << cfg.delta_ladder.size() << " delta points\n";
    return 0;
}

int cmd_splitting(const RunConfig& cfg, int jobs, std::ostream& log) {
    fs::create_directories(cfg.output_dir);
    ResultCache cache(fs::path(cfg.output_dir) / "cache", cfg.cache_enabled);

    struct Task {
        Real delta, sigma;
        unsigned bits;
        ManifoldConfig mcfg;
        std::string key;
        SplittingSample sample;
        json payload;
        bool from_cache = false;
    };
    std::vector<Task> tasks;
    {
        PrecisionGuard guard(cfg.scalar.precision_bits);
        for (const Real& delta : cfg.delta_ladder) {
            Task t;
            t.delta = delta;
            t.sigma = sigma_for(cfg, delta);
            t.mcfg = splitting_manifold_config(cfg, delta, t.bits);
            t.key = splitting_cache_key(cfg, delta, t.sigma, t.bits);
            tasks.push_back(std::move(t));
        }
    }

    // resolve cache hits first
    std::vector<Task*> pending;
    for (auto& t : tasks) {
        auto hit = cache.load(t.key);
        if (hit) {
            t.payload = *hit;
            t.sample = sample_from_json(t.payload);
            t.from_cache = true;
        } else {
            pending.push_back(&t);
        }
    }
    // MPFR precision is process-global, so concurrent tasks must share one
    // precision; group by bits and run groups sequentially
    std::sort(pending.begin(), pending.end(),
              [](const Task* a, const Task* b) { return a->bits < b->bits; });
    std::size_t i = 0;
    while (i < pending.size()) {
        std::size_t j = i;
        while (j < pending.size() && pending[j]->bits == pending[i]->bits) j++;
        PrecisionGuard guard(pending[i]->bits + 32);
        std::mutex mtx;
        std::size_t next = i;
        auto worker = [&]() {
            for (;;) {
                std::size_t mine;
                {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (next >= j) return;
                    mine = next++;
                }
                Task* t = pending[mine];
                Params pr = Params::make(cfg.model, t->delta, t->sigma);
                t->sample = splitting(cfg.model, cfg.series, pr, cfg.u_section, cfg.n_theta,
                                      t->mcfg);
            }
        };
        int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(j - i)));
        if (n_workers == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < n_workers; w++) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        for (std::size_t k = i; k < j; k++) {
            pending[k]->payload = sample_to_json(pending[k]->sample);
            cache.store(pending[k]->key, pending[k]->payload);
        }
        i = j;
    }

    PrecisionGuard guard(cfg.scalar.precision_bits);
    CsvWriter csv(fs::path(cfg.output_dir) / "splitting.csv");
    csv.row({"delta", "sigma", "u_section", "l", "re", "im", "error_budget", "trusted"});
    json meta = json::array();
    for (const auto& t : tasks) {
        // cells come from the serialized payload, so a cached rerun emits
        // byte-identical output
        std::string delta_s = t.payload.at("delta").get<std::string>();
        std::string sigma_s = t.payload.at("sigma").get<std::string>();
        std::string u_s = t.payload.at("u_section").get<std::string>();
        std::string budget_s = t.payload.at("error_budget").get<std::string>();
        std::string trusted_s = t.payload.at("trusted").get<bool>() ? "1" : "0";
        for (const auto& m : t.payload.at("delta_modes"))
            csv.row({delta_s, sigma_s, u_s, std::to_string(m[0].get<long>()),
                     m[1].get<std::string>(), m[2].get<std::string>(), budget_s, trusted_s});
        json m;
        m["delta"] = t.payload.at("delta").get<std::string>();
        m["precision_bits"] = t.bits;
        m["seed_radius"] = num(t.mcfg.seed_rho);
        m["abs_tol"] = num(t.mcfg.integrator.abs_tol);
        m["rel_tol"] = num(t.mcfg.integrator.rel_tol);
        m["method"] = t.mcfg.integrator.method == IntegratorConfig::Method::taylor_series
                          ? "taylor_series"
                          : "gauss_collocation";
        m["from_cache"] = t.from_cache;
        meta.push_back(std::move(m));
    }
    std::ofstream metaf(fs::path(cfg.output_dir) / "splitting_meta.json");
    metaf << meta.dump(1) << "\n";
    log << "splitting: " << tasks.size() << " delta points ("
        << std::count_if(tasks.begin(), tasks.end(), [](const Task& t) { return t.from_cache; })
        << " from cache)\n";
    return 0;
}

int cmd_report(const RunConfig& cfg, std::ostream& log) {
    PrecisionGuard guard(cfg.scalar.precision_bits);
    fs::create_directories(cfg.output_dir);
    ResultCache cache(fs::path(cfg.output_dir) / "cache", true);

    // report consumes the splitting cache; missing inputs are an error
    std::vector<SplittingSample> samples;
    std::vector<std::string> missing;
    for (const Real& delta : cfg.delta_ladder) {
        Real sigma = sigma_for(cfg, delta);
        unsigned bits = 0;
        splitting_manifold_config(cfg, delta, bits);
        std::string key = splitting_cache_key(cfg, delta, sigma, bits);
        auto hit = cache.load(key);
        if (!hit) {
            missing.push_back("splitting sample for delta=" + display_string(delta) +
                              " (run the splitting command first)");
            continue;
        }
        samples.push_back(sample_from_json(*hit));
    }
    if (!missing.empty()) {
        log << "report: missing inputs:\n";
        for (const auto& m : missing) log << "  - " << m << "\n";
        return 2;
    }

    ComparisonReport rep = compare_routes(cfg.model, cfg.series, samples, cfg.scalar);

    CsvWriter csv(fs::path(cfg.output_dir) / "report.csv");
    csv.row({"delta", "sigma", "trusted", "measured_re", "measured_im", "measured_budget",
             "melnikov_re", "melnikov_im", "asymptotic_re", "asymptotic_im", "measured_avg",
             "ratio_melnikov", "ratio_asymptotic", "phase_gap_melnikov",
             "phase_gap_melnikov_L0", "phase_gap_asymptotic", "phase_gap_asymptotic_L0"});
    for (const auto& r : rep.rows)
        csv.row({num(r.delta), num(r.sigma), r.trusted ? "1" : "0", num(r.measured_mode1.re),
                 num(r.measured_mode1.im), num(r.measured_budget), num(r.melnikov_mode1.re),
                 num(r.melnikov_mode1.im), num(r.asymptotic_mode1.re),
                 num(r.asymptotic_mode1.im), num(r.measured_avg), num(r.ratio_melnikov),
                 num(r.ratio_asymptotic), num(r.phase_gap_melnikov),
                 num(r.phase_gap_melnikov_L0), num(r.phase_gap_asymptotic),
                 num(r.phase_gap_asymptotic_L0)});

    std::ofstream verdict(fs::path(cfg.output_dir) / "report_verdict.txt");
    bool all_pass = true;
    auto check = [&](const std::string& name, bool pass, const std::string& detail) {
        verdict << (pass ? "PASS  " : "FAIL  ") << name << "  " << detail << "\n";
        log << (pass ? "PASS  " : "FAIL  ") << name << "  " << detail << "\n";
        if (!pass) all_pass = false;
    };

    // per-sample gates
    std::vector<const ComparisonRow*> ladder;
    for (const auto& r : rep.rows) ladder.push_back(&r);
    std::sort(ladder.begin(), ladder.end(),
              [](const ComparisonRow* a, const ComparisonRow* b) { return a->delta > b->delta; });
    for (const auto* r : ladder)
        check("trusted delta=" + display_string(r->delta), r->trusted,
              "budget " + display_string(r->measured_budget));
    if (!ladder.empty()) {
        const auto* coarse = ladder.front();
        const auto* fine = ladder.back();
        check("ratio-coarse", abs(coarse->ratio_melnikov - 1) <= cfg.ratio_gate_coarse,
              "|ratio-1| = " + display_string(abs(coarse->ratio_melnikov - 1)));
        check("ratio-fine", abs(fine->ratio_melnikov - 1) <= cfg.ratio_gate_fine,
              "|ratio-1| = " + display_string(abs(fine->ratio_melnikov - 1)));
        check("ratio-monotone", rep.melnikov_deviation_shrinks, "");
        check("phase-fine", fine->phase_gap_melnikov <= cfg.phase_gate,
              "gap " + display_string(fine->phase_gap_melnikov) + " rad");
    }
    // averages
    for (const auto* r : ladder) {
        if (cfg.model.conservative) {
            check("average-conservative delta=" + display_string(r->delta),
                  abs(r->measured_avg) <= r->measured_budget,
                  "avg " + display_string(r->measured_avg));
        } else if (cfg.sigma_mode == SigmaMode::star) {
            Real gate = 10 * pow(r->delta, cfg.model.p + 4);
            check("average-sigma-star delta=" + display_string(r->delta),
                  abs(r->measured_avg) <= gate,
                  "avg " + display_string(r->measured_avg) + " gate " + display_string(gate));
        }
    }
    // sharp bound with the paper constants
    for (const auto& s : samples) {
        if (!s.trusted) continue;
        Params pr = Params::make(cfg.model, s.delta, s.sigma);
        Real ups0 = abs(upsilon0_quadrature(cfg.model, cfg.series, pr, 0, cfg.scalar).value) +
                    abs(s.delta_modes.mode(0));
        check("sharp-bound delta=" + display_string(s.delta),
              sharp_bound_check(cfg.model, pr, s, ups0, Real(2)), "M=1000 kappa=2");
    }
    // exponential-law fit, when the ladder supports it
    {
        int trusted = 0;
        Real dmin, dmax;
        bool first = true;
        for (const auto& s : samples) {
            if (!s.trusted) continue;
            trusted++;
            if (first) {
                dmin = dmax = s.delta;
                first = false;
            } else {
                dmin = std::min(dmin, s.delta);
                dmax = std::max(dmax, s.delta);
            }
        }
        if (trusted >= 4 && dmax >= 2 * dmin) {
            auto fit = fit_exponential_law(samples, cfg.model);
            CsvWriter fcsv(fs::path(cfg.output_dir) / "report_fit.csv");
            fcsv.row({"rate", "power", "log_prefactor", "rate_constrained",
                      "log_prefactor_constrained", "residual_rms", "condition",
                      "rate_unc", "power_unc", "prefactor_unc"});
            fcsv.row({num(fit.rate), num(fit.power), num(fit.log_prefactor),
                      num(fit.rate_constrained), num(fit.log_prefactor_constrained),
                      num(fit.residual_rms), num(fit.condition_estimate),
                      num(fit.rate_uncertainty), num(fit.power_uncertainty),
                      num(fit.prefactor_uncertainty)});
            Real rate_want = cfg.model.alpha0 * pi() / (2 * cfg.model.d);
            Real power_want = cfg.model.p - 2 / cfg.model.d;
            check("fit-rate", abs(fit.rate_constrained - rate_want) <= cfg.rate_gate * rate_want,
                  "constrained rate " + display_string(fit.rate_constrained) + " vs " +
                      display_string(rate_want));
            check("fit-power", abs(fit.power - power_want) <= cfg.power_gate,
                  "power " + display_string(fit.power) + " vs " + display_string(power_want));
        } else {
            verdict << "SKIP  fit (needs >= 4 trusted samples spanning a factor 2 in delta)\n";
            log << "SKIP  fit (needs >= 4 trusted samples spanning a factor 2 in delta)\n";
        }
    }
    verdict << (all_pass ? "overall: PASS\n" : "overall: FAIL\n");
    log << (all_pass ? "overall: PASS\n" : "overall: FAIL\n");
    (void)wrap_pm_pi;
    return all_pass ? 0 : 1;
}

}  // namespace hz
