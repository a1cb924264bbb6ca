// Heat equation on a 16-cell grid: RK23 vs third-order Adams-Bashforth vs a
// tiny semi-constrained network trained with the default schedule.
#include <cstdio>

#include "lmmnet/lmmnet.hpp"

int main() {
    using namespace lmmnet;
    const Grid1D fine{64, 1.0}, coarse{16, 1.0};
    const auto pde = PdeSpec::heat(0.5);
    const double dt = 1e-4, t_end = 0.1;

    const auto truth = [&] {
        FieldSeries s(coarse, dt, 0.0, static_cast<std::size_t>(t_end / dt + 0.5) + 1);
        for (std::size_t i = 0; i < s.n_times; ++i) {
            const auto v = exact_cell_averages(pde, coarse, s.time(i));
            std::copy(v.begin(), v.end(), s.row(i).begin());
        }
        return s;
    }();

    const RunConfig rk{pde, coarse, dt, t_end, IntegratorKind::Rk23Adaptive, 3};
    const RunConfig ab{pde, coarse, dt, t_end, IntegratorKind::AdamsBashforth, 3};
    const auto v0 = initial_state(pde, coarse);
    const auto e_rk = error_report(run_simulation(rk, v0, {}, {}).series, truth);
    const auto e_ab = error_report(run_simulation(ab, v0, {}, {}).series, truth);

    const SpatialOperator op(pde, fine);
    const auto data = build_training_set(rk23_integrate(op, initial_state(pde, fine), 0.0, t_end, dt, {1e-8, 1e-11}),
                                         4, pde);
    LossConfig cfg;
    cfg.n_steps = 8000;
    cfg.gamma = 1e-18;
    cfg.log_every = 100;
    const auto net = train(ConstraintMode::SemiConstrained, data, cfg);
    RunConfig lr = ab;
    lr.integrator = IntegratorKind::LearnedScheme;
    const auto e_nn = error_report(run_simulation(lr, v0, learned_provider(net.params), {}).series, truth);

    std::printf("%-8s %12s %12s\n", "method", "MSE", "MAE");
    std::printf("%-8s %12.4e %12.4e\n", "rk23", e_rk.mse_total, e_rk.mae_total);
    std::printf("%-8s %12.4e %12.4e\n", "adams3", e_ab.mse_total, e_ab.mae_total);
    std::printf("%-8s %12.4e %12.4e   (%d attempt(s), %zu/%zu infeasible)\n", "semi", e_nn.mse_total, e_nn.mae_total,
                net.attempts, net.feasibility.violations, net.feasibility.total);
}
