#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lmmnet/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Learned 3-step multistep time integration on coarse 1-D grids"};
    app.require_subcommand(1);

    std::string config, out = "out";
    long long seed = -1;
    int jobs = 1;
    auto add_common = [&](CLI::App* sub, const char* config_help) {
        sub->add_option("--config", config, config_help)->required();
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--jobs", jobs, "worker threads for sweeps")->capture_default_str()->check(CLI::PositiveNumber);
    };
    auto* gen = app.add_subcommand("generate", "fine-grid reference runs, coarsened");
    auto* trn = app.add_subcommand("train", "train each constraint mode");
    auto* evl = app.add_subcommand("evaluate", "coarse-grid error tables");
    auto* phs = app.add_subcommand("phase", "per-step phase displacement (wave)");
    auto* tts = app.add_subcommand("ttest", "paired t-tests over per-sample errors");
    for (auto* s : {gen, trn, evl, phs}) add_common(s, "experiment JSON");
    add_common(tts, "paired CSV (method_mse, rk_mse, method_mae, rk_mae)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (tts->parsed()) {
            lmmnet::cmd_ttest(config, out, std::cout);
            return 0;
        }
        auto cfg = lmmnet::load_experiment(config);
        if (seed >= 0) {
            cfg.seed = static_cast<std::uint64_t>(seed);
            for (auto& m : cfg.modes) m.loss.seed = cfg.seed;
        }
        if (gen->parsed()) lmmnet::cmd_generate(cfg, out, jobs, std::cout);
        else if (trn->parsed()) lmmnet::cmd_train(cfg, out, jobs, std::cout);
        else if (evl->parsed()) lmmnet::cmd_evaluate(cfg, out, jobs, std::cout);
        else if (phs->parsed()) lmmnet::cmd_phase(cfg, out, jobs, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
