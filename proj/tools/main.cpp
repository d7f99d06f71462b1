// iconcl: data generation, training, prediction and evaluation for
// in-context operator learning on 1D conservation laws.

#include <cstdio>
#include <exception>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "iconcl/commands.hpp"
#include "iconcl/errors.hpp"

namespace {

int run(int argc, char** argv) {
    CLI::App app{"In-context operator learning for 1D scalar conservation laws"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;

    auto* gen = app.add_subcommand("generate", "Generate operator datasets (WENO3/RK4 + GRF)");
    gen->add_option("--config", config_path, "Run config JSON")->required();
    gen->add_option("--out", out_override, "Override output directory");

    auto* tr = app.add_subcommand("train", "Train the model on generated datasets");
    tr->add_option("--config", config_path, "Run config JSON")->required();
    tr->add_option("--out", out_override, "Override output directory");
    bool resume = false;
    tr->add_flag("--resume", resume, "Continue from the latest checkpoint");

    auto* pr = app.add_subcommand("predict", "Recursive rollout from a stored record");
    iconcl::PredictArgs pargs;
    std::string direction = "forward";
    pr->add_option("--checkpoint", pargs.checkpoint, "Checkpoint directory")->required();
    pr->add_option("--record", pargs.record_dir, "Dataset directory holding records.f32")
        ->required();
    pr->add_option("--record-index", pargs.record_index, "Record index in the file");
    pr->add_option("--out", pargs.out, "Output directory")->required();
    pr->add_option("--t0", pargs.plan.t0, "Time of the first question condition")->required();
    pr->add_option("--dt", pargs.plan.dt, "Prediction cadence");
    pr->add_option("--max-stride", pargs.plan.max_stride, "Maximum stride S");
    pr->add_option("--horizon", pargs.plan.horizon, "Absolute end time")->required();
    pr->add_option("--direction", direction, "forward | reverse");
    pr->add_option("--examples", pargs.plan.examples_per_call, "Examples per model call");
    pr->add_option("--seed", pargs.plan.seed, "Example-draw seed");
    pr->add_option("--cov-r", pargs.cov_r, "Change-of-variables half-width (0 disables)");

    auto* ev = app.add_subcommand("eval", "Run evaluation studies, write CSV curves");
    std::string checkpoint;
    std::vector<std::string> study_list;
    ev->add_option("--config", config_path, "Run config JSON")->required();
    ev->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
    ev->add_option("--studies", study_list,
                   "Subset of grid,generalization,cov,stride (default: all)");
    ev->add_option("--out", out_override, "Override output directory");

    CLI11_PARSE(app, argc, argv);

    auto load_cfg = [&]() {
        iconcl::RunConfig cfg = iconcl::load_run_config(config_path);
        if (!out_override.empty()) cfg.output_dir = out_override;
        return cfg;
    };

    if (gen->parsed()) return iconcl::cmd_generate(load_cfg()) > 0 ? 0 : 2;
    if (tr->parsed()) return iconcl::cmd_train(load_cfg(), resume);
    if (pr->parsed()) {
        if (direction == "reverse")
            pargs.plan.direction = iconcl::Orientation::Reverse;
        else if (direction != "forward")
            throw iconcl::ArgumentError("--direction must be forward or reverse");
        return iconcl::cmd_predict(pargs);
    }
    if (ev->parsed()) {
        std::set<std::string> studies(study_list.begin(), study_list.end());
        return iconcl::cmd_eval(load_cfg(), checkpoint, studies);
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const iconcl::ArgumentError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const iconcl::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
