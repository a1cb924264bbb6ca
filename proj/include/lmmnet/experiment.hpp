#pragma once

// Config-driven workflow behind the command-line tool: generate, train,
// evaluate, phase, ttest. Every command writes plain CSV/JSON into an output
// directory; parallel sweeps fill pre-sized slots so output is deterministic.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "analysis.hpp"
#include "coarsen.hpp"
#include "integrate.hpp"
#include "learner.hpp"
#include "serialize.hpp"
#include "spatial.hpp"
#include "stability.hpp"
#include "types.hpp"

namespace lmmnet {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// config

struct ModeSettings {
    ConstraintMode mode;
    LossConfig loss;
};

struct ExperimentConfig {
    std::string name = "experiment";
    PdeKind pde = PdeKind::Heat;
    double train_parameter = 0.5;
    std::vector<double> test_parameters;
    InitialCondition initial_condition = InitialCondition::Sin2Pi;
    double domain_length = 1.0;
    int fine_cells = 64;
    int coarsen_factor = 4;
    double dt = 1e-4;
    double t_end = 1.0;
    double t_half = 0.5;
    std::string truth = "exact";  // exact | coarsened_fine
    Rk23Options rk;
    Rk23Options fine_rk{1e-8, 1e-11};
    std::vector<std::string> baselines = {"rk", "adams3"};
    bool constant_variants = true;
    int constant_decimals = 6;
    std::uint64_t seed = 0;
    std::vector<ModeSettings> modes;

    // burgers
    double eta = 0.01;
    std::vector<std::uint64_t> train_forcing_seeds;
    std::vector<std::uint64_t> test_forcing_seeds;
    double train_t_end = 20.0;
    int test_domain_multiplier = 1;
    bool write_fine = false;

    // phase
    std::vector<double> phase_speeds;
    std::vector<double> phase_exclude;

    Grid1D fine_grid(int multiplier = 1) const {
        return {fine_cells * multiplier, domain_length * multiplier, Boundary::Periodic};
    }
    Grid1D coarse_grid(int multiplier = 1) const {
        return {fine_cells * multiplier / coarsen_factor, domain_length * multiplier, Boundary::Periodic};
    }
};

// Numbers may be given as JSON numbers or as "a/b" strings.
inline double parse_number(const json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    const auto slash = s.find('/');
    if (slash == std::string::npos) return std::stod(s);
    return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
}

inline std::vector<double> parse_numbers(const json& j) {
    std::vector<double> out;
    for (const auto& v : j) out.push_back(parse_number(v));
    return out;
}

inline Rk23Options parse_rk(const json& j, Rk23Options base) {
    base.rtol = j.value("rtol", base.rtol);
    base.atol = j.value("atol", base.atol);
    base.fixed_step = j.value("fixed_step", base.fixed_step);
    base.fixed_substeps = j.value("fixed_substeps", base.fixed_substeps);
    return base;
}

inline ExperimentConfig parse_experiment(const json& j) {
    ExperimentConfig c;
    c.name = j.value("name", c.name);
    j.at("pde").get_to(c.pde);
    if (c.pde == PdeKind::Wave) c.initial_condition = InitialCondition::Sin4Pi;
    if (c.pde == PdeKind::Burgers) {
        c.initial_condition = InitialCondition::Zero;
        c.domain_length = 2.0 * std::numbers::pi;
        c.truth = "coarsened_fine";
    }
    c.initial_condition = j.value("initial_condition", c.initial_condition);
    if (j.contains("train_parameter")) c.train_parameter = parse_number(j["train_parameter"]);
    if (j.contains("test_parameters")) c.test_parameters = parse_numbers(j["test_parameters"]);
    if (j.contains("domain_length")) c.domain_length = parse_number(j["domain_length"]);
    c.fine_cells = j.value("fine_cells", c.fine_cells);
    c.coarsen_factor = j.value("coarsen_factor", c.coarsen_factor);
    if (j.contains("dt")) c.dt = parse_number(j["dt"]);
    if (j.contains("t_end")) c.t_end = parse_number(j["t_end"]);
    if (j.contains("t_half")) c.t_half = parse_number(j["t_half"]);
    c.truth = j.value("truth", c.truth);
    if (j.contains("rk")) c.rk = parse_rk(j["rk"], c.rk);
    if (j.contains("fine_rk")) c.fine_rk = parse_rk(j["fine_rk"], c.fine_rk);
    c.baselines = j.value("baselines", c.baselines);
    c.constant_variants = j.value("constant_variants", c.constant_variants);
    c.constant_decimals = j.value("constant_decimals", c.constant_decimals);
    c.seed = j.value("seed", c.seed);
    const auto hb = j.value("hidden_bias_init", std::string("zero"));
    if (hb != "output_bias" && hb != "zero") throw std::invalid_argument("hidden_bias_init must be output_bias or zero");
    if (j.contains("modes"))
        for (const auto& [key, m] : j["modes"].items()) {
            ModeSettings s{parse_mode(key), {}};
            auto& L = s.loss;
            L.learning_rate = parse_number(m.at("learning_rate"));
            L.n_steps = m.value("steps", L.n_steps);
            L.gamma = m.contains("gamma") ? parse_number(m["gamma"]) : 0.0;
            L.epsilon = m.contains("epsilon") ? parse_number(m["epsilon"]) : L.epsilon;
            const auto range = parse_numbers(m.at("init_range"));
            if (range.size() != 2) throw std::invalid_argument("init_range needs two numbers");
            L.init_low = range[0];
            L.init_high = range[1];
            L.bias = parse_numbers(m.at("bias"));
            L.retry_cap = m.value("retry_cap", L.retry_cap);
            L.log_every = m.value("log_every", std::size_t{10});
            L.hidden_bias = hb == "zero" ? HiddenBiasInit::Zero : HiddenBiasInit::OutputBias;
            L.seed = c.seed;
            s.loss = L;
            c.modes.push_back(s);
        }
    std::sort(c.modes.begin(), c.modes.end(),
              [](const ModeSettings& a, const ModeSettings& b) { return a.mode < b.mode; });
    if (j.contains("burgers")) {
        const auto& b = j["burgers"];
        if (b.contains("eta")) c.eta = parse_number(b["eta"]);
        c.train_forcing_seeds = b.value("train_forcing_seeds", c.train_forcing_seeds);
        c.test_forcing_seeds = b.value("test_forcing_seeds", c.test_forcing_seeds);
        if (b.contains("train_t_end")) c.train_t_end = parse_number(b["train_t_end"]);
        c.test_domain_multiplier = b.value("test_domain_multiplier", c.test_domain_multiplier);
        c.write_fine = b.value("write_fine", c.write_fine);
    }
    if (j.contains("phase")) {
        c.phase_speeds = parse_numbers(j["phase"].value("speeds", json::array()));
        c.phase_exclude = parse_numbers(j["phase"].value("exclude", json::array()));
    }
    if (c.fine_cells % c.coarsen_factor != 0) throw std::invalid_argument("coarsen_factor must divide fine_cells");
    return c;
}

inline ExperimentConfig load_experiment(const std::string& path) { return parse_experiment(read_json(path)); }

// ---------------------------------------------------------------------------
// cases

struct Case {
    std::string label;
    double parameter = 0.0;  // lambda, c, or forcing seed
    PdeSpec pde;
    Grid1D fine;
    Grid1D coarse;
    double t_end = 0.0;
};

inline PdeSpec make_pde(const ExperimentConfig& c, double parameter, int multiplier = 1) {
    PdeSpec p;
    switch (c.pde) {
    case PdeKind::Heat: p = PdeSpec::heat(parameter); break;
    case PdeKind::Wave: p = PdeSpec::wave(parameter); break;
    case PdeKind::Burgers:
        p = PdeSpec::burgers(c.eta, ForcingSpec::sample(static_cast<std::uint64_t>(parameter),
                                                        c.domain_length * multiplier));
        break;
    }
    p.initial_condition = c.initial_condition;
    return p;
}

inline std::vector<Case> training_cases(const ExperimentConfig& c) {
    std::vector<Case> out;
    if (c.pde == PdeKind::Burgers) {
        for (auto s : c.train_forcing_seeds)
            out.push_back({"train_" + std::to_string(out.size()), static_cast<double>(s),
                           make_pde(c, static_cast<double>(s)), c.fine_grid(), c.coarse_grid(), c.train_t_end});
    } else {
        out.push_back({"train_0", c.train_parameter, make_pde(c, c.train_parameter), c.fine_grid(), c.coarse_grid(),
                       c.t_end});
    }
    return out;
}

inline std::vector<Case> test_cases(const ExperimentConfig& c) {
    std::vector<Case> out;
    if (c.pde == PdeKind::Burgers) {
        const int m = c.test_domain_multiplier;
        for (auto s : c.test_forcing_seeds)
            out.push_back({"test_" + std::to_string(out.size()), static_cast<double>(s),
                           make_pde(c, static_cast<double>(s), m), c.fine_grid(m), c.coarse_grid(m), c.t_end});
    } else {
        for (double p : c.test_parameters)
            out.push_back({"test_" + std::to_string(out.size()), p, make_pde(c, p), c.fine_grid(), c.coarse_grid(),
                           c.t_end});
    }
    return out;
}

// ---------------------------------------------------------------------------
// helpers

// Runs fn(i) for i < n on up to `jobs` threads; the first error is rethrown.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(jobs), n));
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

inline FieldSeries exact_series(const PdeSpec& pde, const Grid1D& g, double dt, std::size_t n_times) {
    FieldSeries s(g, dt, 0.0, n_times);
    for (std::size_t i = 0; i < n_times; ++i) {
        const auto v = exact_cell_averages(pde, g, s.time(i));
        std::copy(v.begin(), v.end(), s.row(i).begin());
    }
    return s;
}

inline FieldSeries fine_reference(const Case& k, const ExperimentConfig& c) {
    const SpatialOperator op(k.pde, k.fine);
    const auto v0 = initial_state(k.pde, k.fine);
    return rk23_integrate(op, v0, 0.0, k.t_end, c.dt, c.fine_rk);
}

inline json series_document(const Case& k, const FieldSeries& s) {
    return {{"label", k.label}, {"parameter", k.parameter}, {"pde", k.pde}, {"series", s}};
}

inline std::string data_dir(const std::string& out) { return (fs::path(out) / "data").string(); }
inline std::string checkpoint_path(const std::string& out, ConstraintMode m) {
    return (fs::path(out) / "checkpoints" / (std::string(mode_name(m)) + ".json")).string();
}

// ---------------------------------------------------------------------------
// generate

inline void cmd_generate(const ExperimentConfig& c, const std::string& out, int jobs, std::ostream& log) {
    fs::create_directories(data_dir(out));
    const auto train = training_cases(c);
    parallel_for(train.size(), jobs, [&](std::size_t i) {
        const auto fine = fine_reference(train[i], c);
        const auto coarse = coarsen_series(fine, c.coarsen_factor);
        write_json((fs::path(data_dir(out)) / (train[i].label + ".json")).string(), series_document(train[i], coarse));
        if (c.write_fine)
            write_json((fs::path(data_dir(out)) / (train[i].label + "_fine.json")).string(),
                       series_document(train[i], fine));
    });
    log << "generate: " << train.size() << " training series (" << c.fine_grid().n_cells << " -> "
        << c.coarse_grid().n_cells << " cells, " << static_cast<std::size_t>(std::llround(c.t_end / c.dt)) + 1
        << " levels)\n";

    const auto tests = test_cases(c);
    json listing = json::array();
    for (const auto& k : tests) listing.push_back({{"label", k.label}, {"parameter", k.parameter}, {"pde", k.pde}});
    write_json((fs::path(data_dir(out)) / "test_cases.json").string(), listing);
    if (c.truth == "coarsened_fine") {
        parallel_for(tests.size(), jobs, [&](std::size_t i) {
            const auto coarse = coarsen_series(fine_reference(tests[i], c), c.coarsen_factor);
            write_json((fs::path(data_dir(out)) / (tests[i].label + ".json")).string(),
                       series_document(tests[i], coarse));
        });
        log << "generate: " << tests.size() << " test truth series\n";
    }
}

inline TrainingSet load_training_set(const ExperimentConfig& c, const std::string& out) {
    TrainingSet set;
    for (std::size_t i = 0;; ++i) {
        const auto path = fs::path(data_dir(out)) / ("train_" + std::to_string(i) + ".json");
        if (!fs::exists(path)) break;
        const auto doc = read_json(path.string());
        set.add(doc.at("series").get<FieldSeries>(), doc.at("pde").get<PdeSpec>());
    }
    if (set.empty()) throw std::runtime_error("no training data under " + data_dir(out) + "; run generate first");
    (void)c;
    return set;
}

// ---------------------------------------------------------------------------
// train

inline void cmd_train(const ExperimentConfig& c, const std::string& out, int jobs, std::ostream& log) {
    const auto data = load_training_set(c, out);
    fs::create_directories(fs::path(out) / "checkpoints");
    fs::create_directories(fs::path(out) / "logs");
    std::vector<std::string> summary(c.modes.size());
    parallel_for(c.modes.size(), jobs, [&](std::size_t i) {
        const auto& ms = c.modes[i];
        const std::string name = mode_name(ms.mode);
        std::ostringstream row;
        try {
            const auto r = train(ms.mode, data, ms.loss);
            json doc = {{"params", r.params},
                        {"attempts", r.attempts},
                        {"seed_used", r.seed_used},
                        {"violations", r.feasibility.violations},
                        {"samples", r.feasibility.total},
                        {"worst_margin", r.feasibility.worst_margin}};
            doc["constant_coefficients"] = extract_constant_coefficients(r.params, data, c.constant_decimals);
            write_json(checkpoint_path(out, ms.mode), doc);
            std::ostringstream lg;
            lg << "step,mse,barrier,loss\n";
            for (const auto& e : r.log)
                lg << e.step << "," << fmt(e.terms.mse) << "," << fmt(e.terms.barrier) << "," << fmt(e.terms.loss)
                   << "\n";
            write_text((fs::path(out) / "logs" / ("train_" + name + ".csv")).string(), lg.str());
            const double final_loss = r.log.empty() ? 0.0 : r.log.back().terms.loss;
            row << name << ",ok," << r.attempts << "," << r.seed_used << "," << r.feasibility.violations << ","
                << r.feasibility.total << "," << fmt(final_loss);
        } catch (const RetryCapExhausted& e) {
            fs::remove(checkpoint_path(out, ms.mode));
            row << name << ",failed," << e.attempts << ",," << e.violating_samples << "," << e.total_samples << ",";
        } catch (const std::exception& e) {
            fs::remove(checkpoint_path(out, ms.mode));
            row << name << ",failed,,,,,";
        }
        summary[i] = row.str();
    });
    std::ostringstream os;
    os << "mode,status,attempts,seed_used,violations,samples,final_loss\n";
    for (const auto& s : summary) os << s << "\n";
    write_text((fs::path(out) / "train_summary.csv").string(), os.str());
    log << os.str();
}

// ---------------------------------------------------------------------------
// evaluate

struct MethodSpec {
    std::string name;
    IntegratorKind kind = IntegratorKind::Rk23Adaptive;
    int ab_order = 3;
    std::optional<MlpParams> params;
    std::optional<SchemeCoefficients> fixed;
};

inline std::vector<MethodSpec> methods_for(const ExperimentConfig& c, const std::string& out) {
    std::vector<MethodSpec> ms;
    for (const auto& b : c.baselines) {
        if (b == "rk") ms.push_back({"rk", IntegratorKind::Rk23Adaptive, 3, {}, {}});
        else if (b == "rk_fixed") ms.push_back({"rk_fixed", IntegratorKind::Rk23Fixed, 3, {}, {}});
        else if (b.rfind("adams", 0) == 0) ms.push_back({b, IntegratorKind::AdamsBashforth, std::stoi(b.substr(5)), {}, {}});
        else throw std::invalid_argument("unknown baseline " + b);
    }
    for (const auto& m : c.modes) {
        const auto path = checkpoint_path(out, m.mode);
        const std::string name = mode_name(m.mode);
        if (!fs::exists(path)) {
            ms.push_back({name, IntegratorKind::LearnedScheme, 3, {}, {}});  // reported as missing
            continue;
        }
        const auto doc = read_json(path);
        ms.push_back({name, IntegratorKind::LearnedScheme, 3, doc.at("params").get<MlpParams>(), {}});
        if (c.constant_variants && m.mode != ConstraintMode::FullyConstrained)
            ms.push_back({name + "_constant", IntegratorKind::FixedCoefficients, 3, {},
                          doc.at("constant_coefficients").get<SchemeCoefficients>()});
    }
    return ms;
}

struct MethodOutcome {
    bool ok = false;
    std::string status;
    TableRow row;
    double mse_total = 0.0, mae_total = 0.0;
    std::size_t infeasible_steps = 0;
    SimulationResult sim;
};

// Steps whose rho violates the classical root condition (simple roots on the
// circle allowed, so Adams-3's rho = chi^2 (chi - 1) counts as feasible).
inline std::size_t count_infeasible(const std::vector<SchemeCoefficients>& per_step) {
    std::size_t bad = 0;
    const SchemeCoefficients* last = nullptr;
    bool last_ok = true;
    for (const auto& s : per_step) {
        if (s.k() != 3) continue;
        if (!last || !(s == *last)) {
            last_ok = root_condition_oracle_lenient(generating_polynomials(s).rho);
            last = &s;
        }
        if (!last_ok) ++bad;
    }
    return bad;
}

inline MethodOutcome run_method(const MethodSpec& m, const Case& k, const FieldSeries& truth, const ExperimentConfig& c,
                                bool keep_sim = false) {
    MethodOutcome o;
    try {
        RunConfig rc{k.pde, k.coarse, c.dt, k.t_end, m.kind, m.ab_order};
        SimulationOptions so;
        so.rk = c.rk;
        CoefficientProvider prov;
        if (m.kind == IntegratorKind::LearnedScheme) {
            if (!m.params) throw std::runtime_error("no checkpoint");
            prov = learned_provider(*m.params);
        } else if (m.kind == IntegratorKind::FixedCoefficients) {
            prov = fixed_provider(*m.fixed);
            so.provider_depth = static_cast<int>(m.fixed->k());
        }
        const auto v0 = truth.row(0);
        auto sim = run_simulation(rc, v0, prov, so);
        const auto rep = error_report(sim.series, truth);
        o.row = table_row(rep, c.t_half, k.t_end);
        o.mse_total = rep.mse_total;
        o.mae_total = rep.mae_total;
        o.infeasible_steps = count_infeasible(sim.coefficients);
        o.ok = true;
        o.status = "ok";
        if (keep_sim) o.sim = std::move(sim);
    } catch (const NonFiniteState& e) {
        o.status = "nonfinite@" + std::to_string(e.step);
    } catch (const std::exception& e) {
        o.status = std::string("failed:") + e.what();
    }
    std::replace(o.status.begin(), o.status.end(), ',', ';');
    return o;
}

inline FieldSeries truth_for(const Case& k, const ExperimentConfig& c, const std::string& out) {
    if (c.truth == "exact") return exact_series(k.pde, k.coarse, c.dt, static_cast<std::size_t>(std::llround(k.t_end / c.dt)) + 1);
    const auto path = fs::path(data_dir(out)) / (k.label + ".json");
    return read_json(path.string()).at("series").get<FieldSeries>();
}

inline void cmd_evaluate(const ExperimentConfig& c, const std::string& out, int jobs, std::ostream& log) {
    const auto cases = test_cases(c);
    const auto methods = methods_for(c, out);
    std::vector<std::vector<MethodOutcome>> res(cases.size());
    parallel_for(cases.size(), jobs, [&](std::size_t i) {
        const auto truth = truth_for(cases[i], c, out);
        for (const auto& m : methods) res[i].push_back(run_method(m, cases[i], truth, c));
    });

    const char* pname = c.pde == PdeKind::Heat ? "lambda" : c.pde == PdeKind::Wave ? "c" : "forcing_seed";
    std::ostringstream os;
    os << "case," << pname
       << ",method,status,mse_0_half,mse_0_end,mae_0_half,mae_0_end,max_mse,max_mae,infeasible_steps\n";
    for (std::size_t i = 0; i < cases.size(); ++i)
        for (std::size_t m = 0; m < methods.size(); ++m) {
            const auto& o = res[i][m];
            os << cases[i].label << "," << fmt(cases[i].parameter) << "," << methods[m].name << "," << o.status;
            if (o.ok)
                os << "," << fmt(o.row.mse_half) << "," << fmt(o.row.mse_full) << "," << fmt(o.row.mae_half) << ","
                   << fmt(o.row.mae_full) << "," << fmt(o.row.max_mse) << "," << fmt(o.row.max_mae) << ","
                   << o.infeasible_steps;
            else
                os << ",,,,,,,";
            os << "\n";
        }
    write_text((fs::path(out) / "evaluate.csv").string(), os.str());

    // paired per-case totals against RK, the input format of `ttest`
    const auto rk = std::find_if(methods.begin(), methods.end(), [](const MethodSpec& m) { return m.name == "rk"; });
    if (rk != methods.end()) {
        const std::size_t r = static_cast<std::size_t>(rk - methods.begin());
        for (std::size_t m = 0; m < methods.size(); ++m) {
            if (m == r) continue;
            std::ostringstream ps;
            ps << "sample,method_mse,rk_mse,method_mae,rk_mae\n";
            bool any = false;
            for (std::size_t i = 0; i < cases.size(); ++i) {
                const auto &a = res[i][m], &b = res[i][r];
                if (!a.ok || !b.ok) continue;
                ps << i << "," << fmt(a.mse_total) << "," << fmt(b.mse_total) << "," << fmt(a.mae_total) << ","
                   << fmt(b.mae_total) << "\n";
                any = true;
            }
            if (any)
                write_text((fs::path(out) / ("paired_" + methods[m].name + "_vs_rk.csv")).string(), ps.str());
        }
    }
    log << "evaluate: " << cases.size() << " cases x " << methods.size() << " methods -> "
        << (fs::path(out) / "evaluate.csv").string() << "\n";
}

// ---------------------------------------------------------------------------
// phase

inline void cmd_phase(const ExperimentConfig& c, const std::string& out, int jobs, std::ostream& log) {
    if (c.pde != PdeKind::Wave) throw std::invalid_argument("phase: wave experiments only");
    const auto speeds = c.phase_speeds.empty() ? c.test_parameters : c.phase_speeds;
    const Grid1D g = c.coarse_grid();
    const double k = initial_wavenumber(make_pde(c, 1.0), g.domain_length);
    auto methods = methods_for(c, out);
    std::erase_if(methods, [](const MethodSpec& m) {
        return m.kind == IntegratorKind::Rk23Adaptive || m.kind == IntegratorKind::Rk23Fixed ||
               (m.kind == IntegratorKind::AdamsBashforth && m.ab_order != 3) ||
               (m.kind == IntegratorKind::LearnedScheme && !m.params);
    });

    struct Row {
        std::string method;
        double c, displacement, amplitude;
        bool averaged;
    };
    std::vector<std::vector<Row>> rows(speeds.size());
    parallel_for(speeds.size(), jobs, [&](std::size_t i) {
        const double cs = speeds[i];
        rows[i].push_back({"exact", cs, cs * c.dt, 1.0, false});
        for (const auto& m : methods) {
            PhaseReport p;
            if (m.kind == IntegratorKind::AdamsBashforth) p = phase_displacement(adams_bashforth(3), g.dx(), c.dt, cs, k);
            else if (m.kind == IntegratorKind::FixedCoefficients) p = phase_displacement(*m.fixed, g.dx(), c.dt, cs, k);
            else {
                Case kc{"phase", cs, make_pde(c, cs), c.fine_grid(), g, c.t_end};
                const auto truth = exact_series(kc.pde, g, c.dt, 3);
                RunConfig rc{kc.pde, g, c.dt, c.t_end, IntegratorKind::LearnedScheme, 3};
                SimulationOptions so;
                so.rk = c.rk;
                const auto sim = run_simulation(rc, truth.row(0), learned_provider(*m.params), so);
                p = mean_phase_displacement(sim.coefficients, g.dx(), c.dt, cs, k);
            }
            rows[i].push_back({m.name, cs, p.displacement, p.amplitude, p.time_averaged});
        }
    });

    std::ostringstream os;
    os << "c,method,displacement,amplitude,time_averaged\n";
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> fit;
    std::vector<std::string> order;
    for (const auto& group : rows)
        for (const auto& r : group) {
            os << fmt(r.c) << "," << r.method << "," << fmt(r.displacement) << "," << fmt(r.amplitude) << ","
               << (r.averaged ? 1 : 0) << "\n";
            const bool excluded = std::any_of(c.phase_exclude.begin(), c.phase_exclude.end(),
                                              [&](double e) { return std::abs(e - r.c) < 1e-12; });
            if (excluded) continue;
            if (!fit.count(r.method)) order.push_back(r.method);
            fit[r.method].first.push_back(r.c);
            fit[r.method].second.push_back(r.displacement);
        }
    write_text((fs::path(out) / "phase.csv").string(), os.str());
    std::ostringstream ss;
    ss << "method,slope\n";
    for (const auto& name : order)
        ss << name << "," << fmt(fit_slope_through_origin(fit[name].first, fit[name].second)) << "\n";
    write_text((fs::path(out) / "phase_slopes.csv").string(), ss.str());
    log << ss.str();
}

// ---------------------------------------------------------------------------
// ttest

inline std::string pct(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

// Reads paired columns (method_mse, rk_mse, method_mae, rk_mae) and writes
// reductions, means and p-values in the tabular report layout.
inline TTestResult cmd_ttest(const std::string& csv_path, const std::string& out, std::ostream& log) {
    const auto t = read_csv(csv_path);
    const auto mm = t.numbers("method_mse"), rm = t.numbers("rk_mse");
    const auto ma = t.numbers("method_mae"), ra = t.numbers("rk_mae");
    if (mm.size() < 2) throw std::invalid_argument("ttest: need at least 2 samples");
    const auto smse = summarize_samples(mm, rm), smae = summarize_samples(ma, ra);
    const auto pmse = paired_ttest(mm, rm), pmae = paired_ttest(ma, ra);

    std::ostringstream os;
    os << "row,method_mse,rk_mse,method_mae,rk_mae,mse_reduction_pct,mae_reduction_pct\n";
    for (std::size_t i = 0; i < mm.size(); ++i)
        os << "sample " << i << "," << fmt(mm[i]) << "," << fmt(rm[i]) << "," << fmt(ma[i]) << "," << fmt(ra[i]) << ","
           << pct(smse.reduction_pct[i]) << "," << pct(smae.reduction_pct[i]) << "\n";
    const double red_mse = 100.0 * (smse.mean_reference - smse.mean_method) / smse.mean_reference;
    const double red_mae = 100.0 * (smae.mean_reference - smae.mean_method) / smae.mean_reference;
    os << "mean," << fmt(smse.mean_method) << "," << fmt(smse.mean_reference) << "," << fmt(smae.mean_method) << ","
       << fmt(smae.mean_reference) << "," << pct(red_mse) << "," << pct(red_mae) << "\n";
    os << "p-value," << fmt(pmse.p) << ",," << fmt(pmae.p) << ",,,\n";
    fs::create_directories(out);
    const auto dest = fs::path(out) / ("ttest_" + fs::path(csv_path).stem().string() + ".csv");
    write_text(dest.string(), os.str());
    log << "ttest: n=" << mm.size() << " mean(method mse)=" << fmt(smse.mean_method) << " p(mse)=" << fmt(pmse.p)
        << " p(mae)=" << fmt(pmae.p) << " -> " << dest.string() << "\n";
    return pmse;
}

}  // namespace lmmnet
