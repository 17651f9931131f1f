#pragma once

// Experiment orchestration: versioned JSON configs (unknown fields rejected),
// built-in presets, the deterministic multi-seed runner with CSV/JSON
// emission, and named pass/fail criteria evaluated by `run`.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ncmet/batteries.hpp"
#include "ncmet/dynamics.hpp"
#include "ncmet/met.hpp"
#include "ncmet/qr_oracle.hpp"
#include "ncmet/serialize.hpp"

namespace ncmet {

struct ExperimentConfig {
    AlgebraPtr algebra;
    Json algebra_json;
    BaseSystem::Spec base_spec;
    GeneratorSpec generator;
    Json generator_json;
    Json base_json;
    std::vector<long> horizons;
    std::vector<std::uint64_t> seeds;
    std::vector<double> thresholds;
    std::optional<double> invariance_threshold;
    double smooth_epsilon = 0.05;
    bool use_known_limit = false;
    Json growth_vector_json;  // {"kind":"ones"} or {"kind":"element","value":...}
    std::vector<std::string> criteria;
    std::string csv_path;
    std::string summary_path;
    int parallelism = 0;  // 0 = hardware concurrency
};

inline const std::vector<std::string>& known_criteria() {
    static const std::vector<std::string> names = {
        "counterexample-limit-operator", "counterexample-growth-gap",
        "counterexample-drift",          "classical-qr-agreement",
        "classical-determinant-gap",     "classical-invariance"};
    return names;
}

inline Json config_to_json(const ExperimentConfig& cfg) {
    Json j;
    j["schema_version"] = 1;
    j["algebra"] = cfg.algebra_json;
    j["cocycle"] = Json{{"base", cfg.base_json}, {"generator", cfg.generator_json}};
    j["horizons"] = cfg.horizons;
    j["seeds"] = cfg.seeds;
    j["oseledets_thresholds"] = cfg.thresholds;
    j["growth_vector"] = cfg.growth_vector_json;
    j["smooth_epsilon"] = cfg.smooth_epsilon;
    if (cfg.invariance_threshold) j["invariance_threshold"] = *cfg.invariance_threshold;
    j["use_known_limit"] = cfg.use_known_limit;
    j["criteria"] = cfg.criteria;
    if (!cfg.csv_path.empty() || !cfg.summary_path.empty())
        j["output"] = Json{{"csv", cfg.csv_path}, {"summary", cfg.summary_path}};
    j["parallelism"] = cfg.parallelism;
    return j;
}

inline ExperimentConfig parse_config(const Json& j) {
    expect_keys(j,
                {"schema_version", "algebra", "cocycle", "horizons", "seeds",
                 "oseledets_thresholds", "growth_vector", "smooth_epsilon",
                 "invariance_threshold", "use_known_limit", "criteria", "output",
                 "parallelism"},
                "config");
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw ConfigError("config.schema_version: must be 1");
    ExperimentConfig cfg;
    if (!j.contains("algebra")) throw ConfigError("config.algebra: required");
    cfg.algebra = algebra_from_json(j["algebra"]);
    cfg.algebra_json = algebra_to_json(*cfg.algebra);

    if (!j.contains("cocycle")) throw ConfigError("config.cocycle: required");
    const Json& jc = j["cocycle"];
    expect_keys(jc, {"base", "generator"}, "config.cocycle");
    if (!jc.contains("base") || !jc.contains("generator"))
        throw ConfigError("config.cocycle: need base and generator");

    const Json& jb = jc["base"];
    const std::string base_kind = jb.value("kind", "");
    if (base_kind == "odometer") {
        expect_keys(jb, {"kind", "bits"}, "config.cocycle.base");
        cfg.base_spec = OdometerSystem{jb.at("bits").get<int>()};
    } else if (base_kind == "bernoulli") {
        expect_keys(jb, {"kind", "probabilities"}, "config.cocycle.base");
        cfg.base_spec = BernoulliSystem{jb.at("probabilities").get<std::vector<double>>()};
    } else if (base_kind == "rotation") {
        expect_keys(jb, {"kind", "alpha"}, "config.cocycle.base");
        cfg.base_spec = RotationSystem{jb.at("alpha").get<double>()};
    } else {
        throw ConfigError("config.cocycle.base.kind: unknown '" + base_kind + "'");
    }
    cfg.base_json = jb;

    const Json& jg = jc["generator"];
    const std::string gen_kind = jg.value("kind", "");
    if (gen_kind == "constant") {
        expect_keys(jg, {"kind", "value"}, "config.cocycle.generator");
        cfg.generator = ConstantGenerator{element_from_json(cfg.algebra, jg.at("value"))};
    } else if (gen_kind == "iid_random") {
        expect_keys(jg, {"kind", "values"}, "config.cocycle.generator");
        IidMatrixGenerator g;
        for (const Json& v : jg.at("values")) g.values.push_back(element_from_json(cfg.algebra, v));
        cfg.generator = std::move(g);
    } else if (gen_kind == "odometer_counterexample") {
        expect_keys(jg, {"kind", "cells", "weight_exponent"}, "config.cocycle.generator");
        cfg.generator = OdometerCounterexampleGenerator{
            jg.at("cells").get<int>(), jg.value("weight_exponent", 2.0)};
    } else if (gen_kind == "diagonal_function") {
        expect_keys(jg, {"kind", "amplitudes", "phases", "log_means"},
                    "config.cocycle.generator");
        const auto amps = jg.at("amplitudes").get<std::vector<double>>();
        const auto phs = jg.at("phases").get<std::vector<double>>();
        DiagonalRotationGenerator g;
        g.amplitudes = Eigen::Map<const RealVector>(amps.data(), static_cast<Eigen::Index>(amps.size()));
        g.phases = Eigen::Map<const RealVector>(phs.data(), static_cast<Eigen::Index>(phs.size()));
        if (jg.contains("log_means")) {
            const auto means = jg.at("log_means").get<std::vector<double>>();
            g.log_means =
                Eigen::Map<const RealVector>(means.data(), static_cast<Eigen::Index>(means.size()));
        }
        cfg.generator = std::move(g);
    } else {
        throw ConfigError("config.cocycle.generator.kind: unknown '" + gen_kind + "'");
    }
    cfg.generator_json = jg;

    if (!j.contains("horizons")) throw ConfigError("config.horizons: required");
    cfg.horizons = j["horizons"].get<std::vector<long>>();
    require_horizons(cfg.horizons);

    if (!j.contains("seeds")) throw ConfigError("config.seeds: required");
    cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty()) throw ConfigError("config.seeds: must be non-empty");
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
        for (std::size_t k = i + 1; k < cfg.seeds.size(); ++k)
            if (cfg.seeds[i] == cfg.seeds[k]) throw ConfigError("config.seeds: must be distinct");

    if (j.contains("oseledets_thresholds")) {
        cfg.thresholds = j["oseledets_thresholds"].get<std::vector<double>>();
        for (std::size_t i = 1; i < cfg.thresholds.size(); ++i)
            if (!(cfg.thresholds[i - 1] < cfg.thresholds[i]))
                throw ConfigError("config.oseledets_thresholds: must be ascending");
    }
    cfg.growth_vector_json = j.value("growth_vector", Json{{"kind", "ones"}});
    expect_keys(cfg.growth_vector_json, {"kind", "value"}, "config.growth_vector");
    cfg.smooth_epsilon = j.value("smooth_epsilon", 0.05);
    if (!(cfg.smooth_epsilon > 0.0)) throw ConfigError("config.smooth_epsilon: must be > 0");
    if (j.contains("invariance_threshold"))
        cfg.invariance_threshold = j["invariance_threshold"].get<double>();
    cfg.use_known_limit = j.value("use_known_limit", false);
    if (j.contains("criteria")) {
        cfg.criteria = j["criteria"].get<std::vector<std::string>>();
        for (const std::string& name : cfg.criteria)
            if (std::find(known_criteria().begin(), known_criteria().end(), name) ==
                known_criteria().end())
                throw ConfigError("config.criteria: unknown criterion '" + name + "'");
    }
    if (j.contains("output")) {
        expect_keys(j["output"], {"csv", "summary"}, "config.output");
        cfg.csv_path = j["output"].value("csv", "");
        cfg.summary_path = j["output"].value("summary", "");
    }
    cfg.parallelism = j.value("parallelism", 0);
    if (cfg.parallelism < 0) throw ConfigError("config.parallelism: must be >= 0");
    return cfg;
}

inline CocycleSystem make_cocycle(const ExperimentConfig& cfg) {
    CocycleSystem sys(BaseSystem(cfg.base_spec), cfg.algebra, cfg.generator);
    if (std::holds_alternative<OdometerCounterexampleGenerator>(cfg.generator))
        sys.known_limit = AlgebraElement::scalar(cfg.algebra, std::sqrt(2.0));
    return sys;
}

inline AlgebraElement resolve_growth_vector(const ExperimentConfig& cfg) {
    const std::string kind = cfg.growth_vector_json.value("kind", "ones");
    if (kind == "ones") return AlgebraElement::identity(cfg.algebra);
    if (kind == "element")
        return element_from_json(cfg.algebra, cfg.growth_vector_json.at("value"));
    throw ConfigError("config.growth_vector.kind: unknown '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Presets

inline Json preset_config(const std::string& name) {
    if (name == "odometer-counterexample") {
        const int cells = 18, bits = 30;
        RealVector w(cells);
        for (int j = 0; j < cells; ++j) w[j] = std::pow(static_cast<double>(j + 1), -2.0);
        w /= w.sum();
        Json weights = Json::array();
        for (int j = 0; j < cells; ++j) weights.push_back(w[j]);
        Json cfg;
        cfg["schema_version"] = 1;
        cfg["algebra"] = Json{{"blocks", Json::array({Json{{"kind", "abelian"}, {"weights", weights}}})}};
        cfg["cocycle"] = Json{{"base", Json{{"kind", "odometer"}, {"bits", bits}}},
                              {"generator", Json{{"kind", "odometer_counterexample"},
                                                 {"cells", cells},
                                                 {"weight_exponent", 2.0}}}};
        cfg["horizons"] = Json::array({16, 32, 64, 128, 256, 512, 1024, 2048, 4096});
        cfg["seeds"] = Json::array({1, 2, 3, 4, 5, 6, 7, 8});
        cfg["oseledets_thresholds"] = Json::array({0.1, 0.3, 0.6});
        cfg["growth_vector"] = Json{{"kind", "ones"}};
        cfg["smooth_epsilon"] = 0.05;
        cfg["use_known_limit"] = true;
        cfg["criteria"] = Json::array({"counterexample-limit-operator",
                                       "counterexample-growth-gap", "counterexample-drift"});
        cfg["parallelism"] = 0;
        return cfg;
    }
    if (name == "classical-oseledets-2x2") {
        // one-block elements: [[ [re,im] x 2 ] x 2 ]
        auto elem = [](double a, double b, double c, double d) {
            return Json::array(
                {Json::array({Json::array({Json::array({a, 0.0}), Json::array({b, 0.0})}),
                              Json::array({Json::array({c, 0.0}), Json::array({d, 0.0})})})});
        };
        Json cfg;
        cfg["schema_version"] = 1;
        cfg["algebra"] =
            Json{{"blocks", Json::array({Json{{"kind", "factor"}, {"n", 2}, {"weight", 0.5}}})}};
        cfg["cocycle"] =
            Json{{"base", Json{{"kind", "bernoulli"}, {"probabilities", Json::array({0.5, 0.5})}}},
                 {"generator",
                  Json{{"kind", "iid_random"},
                       {"values", Json::array({elem(2, 1, 1, 1), elem(1, 1, 1, 2)})}}}};
        cfg["horizons"] = Json::array({100, 500, 1000, 2000, 5000, 10000});
        cfg["seeds"] = Json::array({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16});
        cfg["oseledets_thresholds"] = Json::array({-0.5, 0.0, 0.5});
        cfg["growth_vector"] = Json{{"kind", "ones"}};
        cfg["smooth_epsilon"] = 0.05;
        cfg["invariance_threshold"] = 0.0;
        cfg["use_known_limit"] = false;
        cfg["criteria"] = Json::array({"classical-qr-agreement", "classical-determinant-gap",
                                       "classical-invariance"});
        cfg["parallelism"] = 0;
        return cfg;
    }
    throw UsageError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Run

struct SeedResult {
    std::uint64_t seed = 0;
    METEstimate est;
    std::optional<METEstimate> est_fx;
    std::optional<InvarianceCheck> invariance;
    SmoothGrowth smooth;
    std::optional<OseledetsFlag> flag;
    RealVector qr_exponents;  // classical oracle, descending (when computed)
    RealVector lambda_log_spectrum;  // eigenvalues of log Lambda_hat, descending
    std::string error;  // conditioning failure along this seed's path, if any
    bool ok() const { return error.empty(); }
};

struct CriterionResult {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double bound = 0.0;
    std::string detail;
};

struct RunReport {
    Json summary;
    std::string csv;
    std::vector<CriterionResult> criteria;
    bool all_pass = true;
    std::vector<std::string> horizon_warnings;
    double wall_seconds = 0.0;
};

namespace run_detail {

inline int resolve_threads(const ExperimentConfig& cfg, std::size_t jobs) {
    int threads = cfg.parallelism > 0 ? cfg.parallelism
                                      : static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NCMET_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) threads = std::min(threads, cap);
    }
    threads = std::max(1, std::min<int>(threads, static_cast<int>(jobs)));
    return threads;
}

inline RealVector log_spectrum_descending(const METEstimate& est) {
    std::vector<double> vals;
    HermitianEig e = hermitian_eig(est.log_limit);
    for (const RealVector& v : e.values)
        for (Eigen::Index i = 0; i < v.size(); ++i) vals.push_back(v[i]);
    std::sort(vals.begin(), vals.end(), std::greater<double>());
    return Eigen::Map<const RealVector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

inline BasePoint conditioned_t8_point(const CocycleSystem& sys, std::uint64_t seed) {
    if (!std::holds_alternative<OdometerSystem>(sys.base().spec()))
        throw ConfigError("the T8 growth criterion needs an odometer base");
    BasePoint x = sys.base().initial_point(splitmix64(seed ^ 0x7438543874385438ull));
    auto& st = std::get<OdometerState>(x);
    if (st.bits.size() < 19) throw ConfigError("T8 event needs at least 19 odometer bits");
    st.bits[8] = 0;
    st.bits[18] = 1;
    return x;
}

}  // namespace run_detail

inline std::vector<CriterionResult> evaluate_criteria(const ExperimentConfig& cfg,
                                                      const CocycleSystem& sys,
                                                      const std::vector<SeedResult>& results,
                                                      const AlgebraElement& xi) {
    std::vector<CriterionResult> out;
    const double log2 = std::log(2.0);
    const double sqrt2 = std::sqrt(2.0);
    std::string seed_failure;
    for (const auto& r : results)
        if (!r.ok())
            seed_failure += "seed " + std::to_string(r.seed) + ": " + r.error + "; ";
    for (const std::string& name : cfg.criteria) {
        CriterionResult cr;
        cr.name = name;
        if (!seed_failure.empty()) {
            cr.pass = false;
            cr.detail = seed_failure;
            out.push_back(cr);
            continue;
        }
        if (name == "counterexample-limit-operator") {
            cr.bound = 0.05;
            const AlgebraElement target = AlgebraElement::scalar(cfg.algebra, 0.5 * log2);
            double worst = 0.0;
            for (const auto& r : results)
                worst = std::max(worst, l2_norm(r.est.log_limit - target));
            cr.value = worst;
            cr.pass = worst <= cr.bound;
            cr.detail = "max over seeds of ||(1/N) log c(N,x) - log sqrt(2) id||_2";
        } else if (name == "counterexample-drift") {
            cr.bound = 0.05;
            double worst = 0.0;
            for (const auto& r : results) worst = std::max(worst, std::abs(r.est.drift - log2));
            cr.value = worst;
            cr.pass = worst <= cr.bound;
            cr.detail = "max over seeds of |drift_N - log 2|";
        } else if (name == "counterexample-growth-gap") {
            if (!sys.known_limit) throw ConfigError("growth-gap criterion needs the known limit");
            const PositivePoint lim = PositivePoint::from_element(*sys.known_limit);
            const double rho = limit_growth(lim, xi);
            const bool pa = std::abs(rho - sqrt2) <= 1e-12;

            const BasePoint x8 = run_detail::conditioned_t8_point(sys, cfg.seeds.front());
            auto snaps = detail::accumulate_snapshots(sys, x8, {256});
            const double rate = snaps.back().apply_log_norm(xi) / 256.0;
            const bool pb = rate >= log2 - 0.02;

            const SmoothGrowth sg =
                smooth_growth(sys, x8, xi, cfg.horizons, cfg.smooth_epsilon,
                              cfg.use_known_limit ? std::optional<PositivePoint>(lim)
                                                  : std::nullopt);
            const bool pc = sg.value <= sqrt2 + 0.1;

            cr.pass = pa && pb && pc;
            cr.value = rate;
            cr.bound = log2 - 0.02;
            cr.detail = "rho(nu) = " + format_double(rho) +
                        ", T8 rate (1/256) log||c(256,x) 1|| = " + format_double(rate) +
                        ", smooth growth = " + format_double(sg.value) + " <= " +
                        format_double(sqrt2 + 0.1);
        } else if (name == "classical-qr-agreement") {
            cr.bound = 1e-2;
            double worst = 0.0;
            for (const auto& r : results) {
                if (r.qr_exponents.size() != r.lambda_log_spectrum.size()) {
                    worst = 1.0;
                    break;
                }
                for (Eigen::Index i = 0; i < r.qr_exponents.size(); ++i)
                    worst = std::max(worst,
                                     std::abs(r.qr_exponents[i] - r.lambda_log_spectrum[i]));
            }
            cr.value = worst;
            cr.pass = worst <= cr.bound;
            cr.detail = "max per-seed per-exponent |log Lambda_hat - QR oracle|";
        } else if (name == "classical-determinant-gap") {
            cr.bound = 1e-2;
            double worst = 0.0;
            bool have = false;
            for (const auto& r : results)
                for (const auto& row : r.est.diagnostics)
                    if (row.n == 500) {
                        worst = std::max(worst, row.fk_gap_n);
                        have = true;
                    }
            cr.value = worst;
            cr.pass = have && worst <= cr.bound;
            cr.detail = have ? "max over seeds of |(Delta|c(500,x)|)^{1/500} - Delta Lambda_hat|"
                             : "horizon 500 missing";
        } else if (name == "classical-invariance") {
            cr.bound = 5e-2;
            double worst = 0.0;
            bool have = true;
            for (const auto& r : results) {
                if (!r.invariance) {
                    have = false;
                    break;
                }
                worst = std::max(worst, r.invariance->measure_defect);
            }
            cr.value = worst;
            cr.pass = have && worst <= cr.bound;
            cr.detail = have ? "max over seeds of the Lyapunov-law defect"
                             : "invariance_threshold not configured";
        }
        out.push_back(cr);
    }
    return out;
}

inline RunReport run(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    CocycleSystem sys = make_cocycle(cfg);
    const AlgebraElement xi = resolve_growth_vector(cfg);

    RunReport report;
    if (const auto* od = std::get_if<OdometerSystem>(&sys.base().spec())) {
        const long valid = od->bits >= 66 ? std::numeric_limits<long>::max()
                                          : (1L << std::max(0, od->bits - 4));
        if (cfg.horizons.back() > valid)
            report.horizon_warnings.push_back(
                "max horizon exceeds the odometer validity window 2^(bits-4)");
    }

    const bool want_qr =
        std::find(cfg.criteria.begin(), cfg.criteria.end(), "classical-qr-agreement") !=
        cfg.criteria.end();

    std::vector<SeedResult> results(cfg.seeds.size());
    std::vector<std::exception_ptr> failures(cfg.seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cfg.seeds.size()) return;
            SeedResult r;
            r.seed = cfg.seeds[i];
            try {
                const BasePoint x = sys.base().initial_point(r.seed);
                METOptions opts;
                opts.growth_vector = xi;
                r.est = estimate_met(sys, x, cfg.horizons, opts);
                r.lambda_log_spectrum = run_detail::log_spectrum_descending(r.est);
                r.smooth = smooth_growth(
                    sys, x, xi, cfg.horizons, cfg.smooth_epsilon,
                    cfg.use_known_limit && sys.known_limit
                        ? std::optional<PositivePoint>(
                              PositivePoint::from_element(*sys.known_limit))
                        : std::nullopt);
                if (cfg.invariance_threshold) {
                    r.est_fx = estimate_met(sys, sys.base().step(x), cfg.horizons);
                    r.invariance =
                        invariance_check(sys, x, r.est, *r.est_fx, *cfg.invariance_threshold);
                }
                if (!cfg.thresholds.empty()) r.flag = oseledets_flag(r.est, cfg.thresholds);
                if (want_qr && cfg.algebra->block_count() == 1 && cfg.algebra->is_factor(0)) {
                    SamplePath path(sys, r.seed);
                    auto factor = [path](long) mutable { return path.next().block(0); };
                    r.qr_exponents = qr_lyapunov_exponents(
                        factor, cfg.algebra->block_shape(0).first, cfg.horizons.back());
                }
            } catch (const ConditioningError& e) {
                // recorded per seed; the run continues
                r.error = e.what();
            } catch (...) {
                failures[i] = std::current_exception();
            }
            results[i] = std::move(r);
        }
    };
    const int threads = run_detail::resolve_threads(cfg, cfg.seeds.size());
    {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    report.criteria = evaluate_criteria(cfg, sys, results, xi);
    report.all_pass = true;
    for (const auto& cr : report.criteria) report.all_pass = report.all_pass && cr.pass;

    // CSV diagnostics, merged in seed order
    std::ostringstream csv;
    csv << "seed,n,drift_n,dP_rate_n,l2_log_rate_n,fk_gap_n,raw_growth_n,smooth_growth\n";
    for (const auto& r : results) {
        if (!r.ok()) continue;
        for (const auto& row : r.est.diagnostics)
            csv << r.seed << ',' << row.n << ',' << format_double(row.drift_n) << ','
                << format_double(row.dp_rate_n) << ',' << format_double(row.l2_log_rate_n) << ','
                << format_double(row.fk_gap_n) << ',' << format_double(row.raw_growth_n) << ','
                << format_double(r.smooth.value) << '\n';
    }
    report.csv = csv.str();

    // summary JSON
    Json summary;
    summary["config"] = config_to_json(cfg);
    summary["horizon_warnings"] = report.horizon_warnings;
    Json seeds = Json::array();
    for (const auto& r : results) {
        Json s;
        s["seed"] = r.seed;
        if (!r.ok()) {
            s["error"] = r.error;
            seeds.push_back(s);
            continue;
        }
        s["drift"] = r.est.drift;
        s["zero_drift"] = r.est.zero_drift;
        Json spec = Json::array(), lspec = Json::array();
        for (Eigen::Index i = 0; i < r.lambda_log_spectrum.size(); ++i) {
            lspec.push_back(r.lambda_log_spectrum[i]);
            spec.push_back(std::exp(r.lambda_log_spectrum[i]));
        }
        s["limit_operator_spectrum"] = spec;
        s["log_limit_spectrum"] = lspec;
        Json atoms = Json::array();
        for (const auto& a : r.est.lyapunov_distribution.atoms())
            atoms.push_back(Json::array({a.location, a.mass}));
        s["lyapunov_atoms"] = atoms;
        s["smooth_growth"] = r.smooth.value;
        s["smooth_growth_rho"] = r.smooth.rho;
        if (r.invariance) {
            s["invariance"] = Json{{"subspace_defect", r.invariance->subspace_defect},
                                   {"measure_defect", r.invariance->measure_defect}};
        }
        if (r.flag) {
            Json dims = Json::array();
            for (double d : r.flag->dimensions) dims.push_back(d);
            s["oseledets_dimensions"] = dims;
            s["oseledets_warnings"] = r.flag->warnings;
        }
        if (r.qr_exponents.size() > 0) {
            Json q = Json::array();
            for (Eigen::Index i = 0; i < r.qr_exponents.size(); ++i) q.push_back(r.qr_exponents[i]);
            s["qr_oracle_exponents"] = q;
        }
        if (r.est.ray_direction)
            s["km_ray_direction"] = element_to_json(*r.est.ray_direction);
        // almost-uniform convergence probe (abelian cocycles): diagnostic only
        if (cfg.algebra->block_count() == 1 && !cfg.algebra->is_factor(0)) {
            const EgorovProbe probe =
                egorov_probe(sys, sys.base().initial_point(r.seed), cfg.horizons.back(), 0.05);
            s["egorov_probe"] = Json{{"selected_mass", probe.selected_mass},
                                     {"excluded_mass", probe.excluded_mass},
                                     {"sup_deviation_on_selected",
                                      probe.sup_deviation_on_selected}};
        }
        seeds.push_back(s);
    }
    summary["seeds"] = seeds;
    summary["moment_bound_estimate"] = sys.estimate_moment_bound(256, 0);
    Json crits = Json::array();
    for (const auto& cr : report.criteria)
        crits.push_back(Json{{"name", cr.name},
                             {"pass", cr.pass},
                             {"value", cr.value},
                             {"bound", cr.bound},
                             {"detail", cr.detail}});
    summary["criteria"] = crits;
    report.summary = summary;

    if (!cfg.csv_path.empty()) {
        std::ofstream f(cfg.csv_path, std::ios::binary);
        if (!f) throw ConfigError("cannot write csv to " + cfg.csv_path);
        f << report.csv;
    }
    if (!cfg.summary_path.empty()) {
        std::ofstream f(cfg.summary_path, std::ios::binary);
        if (!f) throw ConfigError("cannot write summary to " + cfg.summary_path);
        f << report.summary.dump(2) << '\n';
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace ncmet
