// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is non-zero only for failures not listed with --known-fail.

#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lmmnet/lmmnet.hpp"
#include "oracles.hpp"

using namespace lmmnet;

namespace {

std::ostringstream detail_log;

template <class... A>
void note(const char* f, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    detail_log << "    " << buf << "\n";
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

FieldSeries exact_truth(const PdeSpec& pde, const Grid1D& g, double dt, double t_end) {
    return exact_series(pde, g, dt, static_cast<std::size_t>(std::llround(t_end / dt)) + 1);
}

TableRow coarse_row(const PdeSpec& pde, IntegratorKind kind, const CoefficientProvider& prov = {}) {
    const Grid1D g{16, 1.0};
    const RunConfig cfg{pde, g, 1e-4, 1.0, kind, 3};
    const auto truth = exact_truth(pde, g, 1e-4, 1.0);
    const auto sim = run_simulation(cfg, truth.row(0), prov);
    return table_row(error_report(sim.series, truth), 0.5, 1.0);
}

// ---------------------------------------------------------------------------

bool heat_baseline() {
    const double lambdas[] = {0.1, 0.3, 0.7, 1.0}, ref[] = {7.82e-06, 3.44e-06, 1.33e-06, 8.30e-07};
    bool ok = true;
    for (int i = 0; i < 4; ++i) {
        const auto r = coarse_row(PdeSpec::heat(lambdas[i]), IntegratorKind::Rk23Adaptive);
        const double e = rel(r.mse_half, ref[i]);
        note("lambda=%.1f  RK MSE[0,0.5]=%.4e  reference %.2e  rel.dev %+.1f%%  %s", lambdas[i], r.mse_half, ref[i],
             100 * (r.mse_half - ref[i]) / ref[i], e <= 0.05 ? "ok" : "outside 5%");
        ok &= e <= 0.05;
    }
    return ok;
}

bool wave_baseline() {
    const double cs[] = {0.2, 0.7, 1.0}, ref[] = {2.49e-03, 3.02e-02, 6.10e-02};
    bool ok = true;
    for (int i = 0; i < 3; ++i) {
        const auto pde = PdeSpec::wave(cs[i]);
        const auto rk = coarse_row(pde, IntegratorKind::Rk23Adaptive);
        const auto ab = coarse_row(pde, IntegratorKind::AdamsBashforth);
        const double worst = std::max({rel(ab.mse_half, rk.mse_half), rel(ab.mse_full, rk.mse_full),
                                       rel(ab.mae_half, rk.mae_half), rel(ab.mae_full, rk.mae_full),
                                       rel(ab.max_mse, rk.max_mse), rel(ab.max_mae, rk.max_mae)});
        const double e = rel(rk.mse_half, ref[i]);
        note("c=%.1f  RK MSE[0,0.5]=%.4e  reference %.2e  rel.dev %+.2f%%  Adams-3 vs RK max rel.dev %.2e", cs[i],
             rk.mse_half, ref[i], 100 * (rk.mse_half - ref[i]) / ref[i], worst);
        ok &= e <= 0.05 && worst <= 0.01;
    }
    return ok;
}

bool phase() {
    std::mt19937_64 rng(2024);
    const double dx = 1.0 / 16, k = 4 * std::numbers::pi;
    std::uniform_real_distribution<double> cu(0.05, 1.0), du(1e-4, 5e-3);
    double worst_amp = 0, worst_disp = 0;
    for (int n = 0; n < 100; ++n) {
        const auto s = oracle::random_stable_scheme(rng);
        const double c = cu(rng), dt = du(rng);
        const auto p = phase_displacement(s, dx, dt, c, k);
        const auto f = oracle::sinusoid_fit_phase(s, 16, dt, c);
        double d = p.displacement - f.displacement;
        d -= std::round(d * 2.0) / 2.0;
        worst_amp = std::max(worst_amp, std::abs(p.amplitude - f.amplitude));
        worst_disp = std::max(worst_disp, std::abs(d));
    }
    note("closed form vs sinusoid fit, 100 random stable schemes: max |d amp| %.2e, max |d disp| %.2e", worst_amp,
         worst_disp);

    const std::vector<double> cs{0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<double> exact;
    for (double c : cs) exact.push_back(c * 1e-4);
    const double slope = fit_slope_through_origin(cs, exact);
    note("exact-coefficient slope %.6e (target 1.000e-4)", slope);

    const double alpha = k * dx;
    const double ab = phase_displacement(adams_bashforth(3), dx, 1e-4, 1.0, k).displacement;
    const double target = std::sin(alpha) / alpha * 1e-4;
    note("Adams-3 displacement at alpha=pi/4: %.6e vs (sin a/a) c dt = %.6e (rel.dev %.2e)", ab, target,
         rel(ab, target));
    return worst_amp <= 1e-10 && worst_disp <= 1e-10 && std::abs(slope - 1e-4) <= 1e-7 && rel(ab, target) <= 0.02;
}

bool stability_equivalence() {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-3, 3);
    int disagree = 0, banded = 0, stable = 0;
    for (int n = 0; n < 10000; ++n) {
        std::vector<double> a;
        if (n % 2) a = {u(rng), u(rng), u(rng)};
        else a = oracle::random_stable_scheme(rng).alpha;
        const std::vector<double> rho{a[0], a[1], a[2], 1.0};
        if (unit_circle_distance(rho) < 1e-9) {
            ++banded;
            continue;
        }
        const bool m = satisfies_root_condition_cubic(a);
        stable += m;
        disagree += m != root_condition_oracle_strict(rho);
    }
    int qd = 0;
    for (int n = 0; n < 10000; ++n) {
        const double p = u(rng), q = u(rng);
        const std::vector<double> rho{q, p, 1.0};
        if (unit_circle_distance(rho) < 1e-9) continue;
        qd += satisfies_root_condition_quadratic(p, q) != root_condition_oracle_strict(rho);
    }
    note("cubic: 10000 samples, %d stable, %d in boundary band, %d disagreements; quadratic: %d disagreements",
         stable, banded, disagree, qd);
    return disagree == 0 && qd == 0;
}

TrainingSet make_training(const PdeSpec& pde, double t_end) {
    const Grid1D fine{64, 1.0};
    const SpatialOperator op(pde, fine);
    return build_training_set(rk23_integrate(op, initial_state(pde, fine), 0.0, t_end, 1e-4, {1e-8, 1e-11}), 4, pde);
}

LossConfig heat_cfg(ConstraintMode m, std::uint64_t seed) {
    LossConfig c;
    c.seed = seed;
    c.n_steps = 8000;
    c.log_every = 1000;
    if (m == ConstraintMode::FullyConstrained) {
        c.learning_rate = 5e-7;
        c.gamma = 1e-12;
        c.init_low = -5e-3;
        c.init_high = 5e-3;
        c.bias = {0, 0, 5.0 / 12, -4.0 / 3};
    } else {
        c.learning_rate = 1e-7;
        c.gamma = m == ConstraintMode::SemiConstrained ? 1e-18 : 0.0;
    }
    return c;
}

bool consistency_structure() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3, 3);
    int bad = 0;
    for (int n = 0; n < 10000; ++n)
        bad += !check_consistency(coefficients_from_pq({u(rng), u(rng)}, {u(rng), u(rng)}), 1e-12);
    note("coefficients_from_pq: %d / 10000 inconsistent at 1e-12", bad);

    const auto data = make_training(PdeSpec::heat(0.5), 1.0);
    const auto r = train(ConstraintMode::FullyConstrained, data, heat_cfg(ConstraintMode::FullyConstrained, 0));
    std::size_t steps = 0, inconsistent = 0, infeasible = 0;
    for (double lam : {0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9, 1.0}) {
        const auto pde = PdeSpec::heat(lam);
        const Grid1D g{16, 1.0};
        const RunConfig cfg{pde, g, 1e-4, 1.0, IntegratorKind::LearnedScheme, 3};
        const auto sim = run_simulation(cfg, initial_state(pde, g), learned_provider(r.params));
        for (const auto& s : sim.coefficients) {
            ++steps;
            inconsistent += !check_consistency(s, 1e-12);
            // rho = (chi - 1)(chi^2 + p chi + q) with p = alpha_2 + 1, q = -alpha_0
            infeasible += !satisfies_root_condition_quadratic(s.alpha[2] + 1.0, -s.alpha[0]);
        }
    }
    note("trained Full (heat, 8000 steps): %zu test steps, %zu inconsistent, %zu outside the feasible region", steps,
         inconsistent, infeasible);
    return bad == 0 && steps > 0 && inconsistent == 0 && infeasible == 0;
}

bool statistics_replay() {
    const std::string dir = std::string(LMMNET_SOURCE_DIR) + "/data/";
    struct Ref {
        const char* file;
        double p_mse, p_mae;
    };
    bool ok = true;
    for (const auto& r : {Ref{"burgers_semi_vs_rk.csv", 0.000201141, 0.000180005},
                          Ref{"burgers_un_vs_rk.csv", 0.000147995, 0.000111214}}) {
        const auto t = read_csv(dir + r.file);
        const double pm = paired_ttest(t.numbers("method_mse"), t.numbers("rk_mse")).p;
        const double pa = paired_ttest(t.numbers("method_mae"), t.numbers("rk_mae")).p;
        note("%s: p(MSE)=%.9f (printed %.9f, rel %.1e)  p(MAE)=%.9f (printed %.9f, rel %.1e)", r.file, pm, r.p_mse,
             rel(pm, r.p_mse), pa, r.p_mae, rel(pa, r.p_mae));
        ok &= rel(pm, r.p_mse) <= 1e-3 && rel(pa, r.p_mae) <= 1e-3;
    }
    const auto t = read_csv(dir + "burgers_semi_vs_rk.csv");
    const double mean = summarize_samples(t.numbers("method_mse"), t.numbers("rk_mse")).mean_method;
    note("Semi MSE column mean %.10f (printed 0.010041047)", mean);
    return ok && std::abs(mean - 0.010041047) <= 1e-9;
}

bool convergence_orders() {
    bool ok = true;
    for (int k = 3; k <= 5; ++k) {
        const auto f = scheme_order_on_decay(adams_bashforth(k), {0.02, 0.01, 0.005, 0.0025});
        note("Adams-Bashforth k=%d: order %.4f", k, f.order);
        ok &= !f.degenerate && std::abs(f.order - k) <= 0.2;
    }
    return ok;
}

bool gradient_check() {
    bool ok = true;
    for (auto m : {ConstraintMode::Unconstrained, ConstraintMode::SemiConstrained, ConstraintMode::FullyConstrained}) {
        double worst = 0;
        for (std::uint64_t s = 0; s < 20; ++s) worst = std::max(worst, oracle::gradient_check(m, 100 + s, 1e-3));
        note("%-4s: worst relative deviation over 20 points %.2e", mode_name(m), worst);
        ok &= worst <= 1e-4;
    }
    return ok;
}

// Semi-constrained network trained on parameter 0.5 and tested there.
bool training_smoke() {
    bool heat_ok = false;
    {
        const auto pde = PdeSpec::heat(0.5);
        const auto data = make_training(pde, 1.0);
        const double rk = coarse_row(pde, IntegratorKind::Rk23Adaptive).mse_half;
        for (std::uint64_t seed = 0; seed < 3 && !heat_ok; ++seed) {
            try {
                const auto r = train(ConstraintMode::SemiConstrained, data,
                                     heat_cfg(ConstraintMode::SemiConstrained, seed));
                const double m =
                    coarse_row(pde, IntegratorKind::LearnedScheme, learned_provider(r.params)).mse_half;
                note("heat seed %llu: %d attempt(s), Semi MSE[0,0.5]=%.4e vs RK %.4e", (unsigned long long)(seed),
                     r.attempts, m, rk);
                heat_ok = m <= rk;
            } catch (const std::exception& e) {
                note("heat seed %llu: %s", (unsigned long long)(seed), e.what());
            }
        }
    }
    bool wave_ok = false;
    {
        const auto pde = PdeSpec::wave(0.5);
        const auto data = make_training(pde, 1.0);
        const double rk = coarse_row(pde, IntegratorKind::Rk23Adaptive).mse_half;
        for (std::uint64_t seed = 0; seed < 3 && !wave_ok; ++seed) {
            auto cfg = heat_cfg(ConstraintMode::SemiConstrained, seed);
            cfg.n_steps = 10000;
            cfg.init_low = 0.0;
            try {
                const auto r = train(ConstraintMode::SemiConstrained, data, cfg);
                const double m =
                    coarse_row(pde, IntegratorKind::LearnedScheme, learned_provider(r.params)).mse_half;
                note("wave seed %llu: %d attempt(s), Semi MSE[0,0.5]=%.4e vs RK %.4e (reduction %.1f%%)",
                     (unsigned long long)(seed), r.attempts, m, rk, 100 * (rk - m) / rk);
                wave_ok = m <= 0.5 * rk;
            } catch (const std::exception& e) {
                note("wave seed %llu: %s", (unsigned long long)(seed), e.what());
            }
        }
    }
    return heat_ok && wave_ok;
}

bool barriers() {
    bool ok = true;
    // one margin pushed below 1e-6 at a time
    const double pq[3][2] = {{1.0 - 5e-7, 0.0}, {0.0, 1.0 - 5e-7}, {-1.0 + 5e-7, 0.0}};
    for (const auto& x : pq) {
        const double b = barrier_full(x[0], x[1]);
        note("B2 at (p,q)=(%.7f, %.7f): %.3e", x[0], x[1], b);
        ok &= b > 1e6;
    }
    const double eps = 1e-8;
    const double b1 = barrier_semi(std::vector<double>{0, 0, -1}, eps);
    const double expect = 1 / eps + (1 / (2 + eps) + 3 / (1 + eps));
    note("B1 at Adams-3 (margins 2,0,1,1,1): %.6e, expected %.6e", b1, expect);
    return ok && rel(b1, expect) <= 0.01;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> known_fail, only;
    app.add_option("--known-fail", known_fail, "criteria whose failure is expected and documented");
    app.add_option("--only", only, "run a subset");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, std::function<bool()>>> criteria = {
        {"heat RK baseline table", heat_baseline},
        {"wave RK / Adams-3 baseline table", wave_baseline},
        {"phase closed form vs oracle", phase},
        {"stability oracle equivalence", stability_equivalence},
        {"consistency structure", consistency_structure},
        {"t-test statistics replay", statistics_replay},
        {"Adams-Bashforth convergence orders", convergence_orders},
        {"gradient check", gradient_check},
        {"training smoke", training_smoke},
        {"barrier behaviour", barriers},
    };
    const std::set<int> known(known_fail.begin(), known_fail.end()), subset(only.begin(), only.end());
    int passed = 0, ran = 0, unexpected = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!subset.empty() && !subset.count(id)) continue;
        detail_log.str("");
        bool ok = false;
        try {
            ok = criteria[i].second();
        } catch (const std::exception& e) {
            note("exception: %s", e.what());
        }
        ++ran;
        passed += ok;
        if (!ok && !known.count(id)) ++unexpected;
        std::printf("%s  %2d  %s%s\n%s", ok ? "PASS" : "FAIL", id, criteria[i].first,
                    !ok && known.count(id) ? "  (known)" : "", detail_log.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", passed, ran);
    return unexpected ? 1 : 0;
}
