#include "iconcl/commands.hpp"

#include <cstdio>

#include "iconcl/errors.hpp"
#include "iconcl/io.hpp"
#include "iconcl/parallel.hpp"
#include "iconcl/rng.hpp"

namespace iconcl {

namespace {

GenerationConfig parse_generation(const nlohmann::json& j) {
    GenerationConfig g;
    g.num_initial = j.value("num_initial", g.num_initial);
    g.grid_n = j.value("grid_n", g.grid_n);
    g.solver_dt = j.value("solver_dt", g.solver_dt);
    g.horizon = j.value("horizon", g.horizon);
    g.collect_window = j.value("collect_window", g.collect_window);
    g.tau = j.value("tau", g.tau);
    g.pool_size = j.value("pool_size", g.pool_size);
    g.num_records = j.value("num_records", g.num_records);
    g.record_dt = j.value("record_dt", g.record_dt);
    if (j.contains("grf")) {
        const auto& grf = j.at("grf");
        g.grf_sigma = grf.value("sigma", g.grf_sigma);
        g.grf_ell = grf.value("ell", g.grf_ell);
        g.grf_clip = grf.value("clip", g.grf_clip);
    }
    return g;
}

LossMix parse_mix(const std::string& s) {
    if (s == "fwd+rev" || s == "forward+reverse") return LossMix::ForwardReverseL2;
    if (s == "fwd+consistency" || s == "forward+consistency") return LossMix::ForwardL2Consistency;
    if (s == "fwd-only" || s == "forward-only") return LossMix::ForwardOnly;
    throw ConfigError("unknown loss mix: " + s + " (expected fwd+rev | fwd+consistency | fwd-only)");
}

std::string operator_dir_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "op_%03d", index);
    return buf;
}

} // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    const nlohmann::json j = read_json(path);
    RunConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    cfg.output_dir = j.value("output_dir", cfg.output_dir.string());
    cfg.workers = j.value("workers", cfg.workers);
    cfg.num_operators = j.value("num_operators", cfg.num_operators);
    cfg.coeff_range = j.value("coeff_range", cfg.coeff_range);
    if (j.contains("generation")) cfg.gen = parse_generation(j.at("generation"));

    if (j.contains("model")) {
        const auto& m = j.at("model");
        cfg.model.layers = m.value("layers", cfg.model.layers);
        cfg.model.heads = m.value("heads", cfg.model.heads);
        cfg.model.d_model = m.value("d_model", cfg.model.d_model);
        cfg.model.d_attn = m.value("d_attn", cfg.model.d_attn);
        cfg.model.d_ff = m.value("d_ff", cfg.model.d_ff);
        cfg.model.max_pairs = m.value("max_pairs", cfg.model.max_pairs);
        cfg.model.token_stride = m.value("token_stride", cfg.model.token_stride);
        cfg.model.grid_n = m.value("grid_n", cfg.model.grid_n);
    }
    if (j.contains("training")) {
        const auto& t = j.at("training");
        cfg.train.total_steps = t.value("total_steps", cfg.train.total_steps);
        cfg.train.warmup_fraction = t.value("warmup_fraction", cfg.train.warmup_fraction);
        cfg.train.peak_lr = t.value("peak_lr", cfg.train.peak_lr);
        cfg.train.batch = t.value("batch", cfg.train.batch);
        cfg.train.beta1 = t.value("beta1", cfg.train.beta1);
        cfg.train.beta2 = t.value("beta2", cfg.train.beta2);
        cfg.train.weight_decay = t.value("weight_decay", cfg.train.weight_decay);
        cfg.train.clip_norm = t.value("clip_norm", cfg.train.clip_norm);
        cfg.train.seq_pairs = t.value("seq_pairs", cfg.train.seq_pairs);
        cfg.train.log_every = t.value("log_every", cfg.train.log_every);
        cfg.train.checkpoint_every = t.value("checkpoint_every", cfg.train.checkpoint_every);
        if (t.contains("mix")) cfg.train.mix = parse_mix(t.at("mix").get<std::string>());
        cfg.train.seed = t.value("seed", cfg.seed);
        cfg.train.workers = cfg.workers;
    } else {
        cfg.train.seed = cfg.seed;
        cfg.train.workers = cfg.workers;
    }

    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        if (e.contains("grid")) {
            const auto& g = e.at("grid");
            cfg.grid.points_per_axis = g.value("points_per_axis", cfg.grid.points_per_axis);
            cfg.grid.instances = g.value("instances", cfg.grid.instances);
            if (g.contains("example_counts"))
                cfg.grid.example_counts = g.at("example_counts").get<std::vector<int>>();
            cfg.grid.seed = g.value("seed", cfg.seed + 1);
            if (g.contains("generation")) cfg.grid.gen = parse_generation(g.at("generation"));
        }
        if (e.contains("study")) {
            const auto& s = e.at("study");
            cfg.study_flux = parse_flux(s.value("flux", std::string("sincos")));
            cfg.study.instances = s.value("instances", cfg.study.instances);
            cfg.study.examples_per_call = s.value("examples_per_call", cfg.study.examples_per_call);
            cfg.study.t0_forward = s.value("t0_forward", cfg.study.t0_forward);
            cfg.study.horizon_forward = s.value("horizon_forward", cfg.study.horizon_forward);
            cfg.study.t0_reverse = s.value("t0_reverse", cfg.study.t0_reverse);
            cfg.study.horizon_reverse = s.value("horizon_reverse", cfg.study.horizon_reverse);
            cfg.study.dt = s.value("dt", cfg.study.dt);
            cfg.study.max_stride = s.value("max_stride", cfg.study.max_stride);
            cfg.study.reverse = s.value("reverse", cfg.study.reverse);
            cfg.study.seed = s.value("seed", cfg.seed + 2);
        }
        if (e.contains("cov_r")) cfg.cov_r_values = e.at("cov_r").get<std::vector<double>>();
        if (e.contains("strides")) cfg.stride_values = e.at("strides").get<std::vector<double>>();
        if (e.contains("stride_fluxes"))
            cfg.stride_fluxes = e.at("stride_fluxes").get<std::vector<std::string>>();
    }
    cfg.grid.workers = cfg.workers;
    cfg.study.workers = cfg.workers;
    return cfg;
}

int cmd_generate(const RunConfig& cfg) {
    const auto data_dir = cfg.output_dir / "data";
    std::filesystem::create_directories(data_dir);

    // Operator parameters drawn once from the root seed.
    Rng rng(derive_seed(cfg.seed, 0x0bea7));
    std::vector<FluxSpec> fluxes;
    fluxes.reserve(static_cast<std::size_t>(cfg.num_operators));
    for (int i = 0; i < cfg.num_operators; ++i)
        fluxes.push_back(FluxSpec::cubic(rng.uniform(-cfg.coeff_range, cfg.coeff_range),
                                         rng.uniform(-cfg.coeff_range, cfg.coeff_range),
                                         rng.uniform(-cfg.coeff_range, cfg.coeff_range)));

    std::vector<int> ok(static_cast<std::size_t>(cfg.num_operators), 0);
    std::vector<long> pair_counts(static_cast<std::size_t>(cfg.num_operators), 0);
    const int workers = cfg.workers > 0 ? cfg.workers : default_worker_count();
    parallel_for(cfg.num_operators, workers, [&](int op) {
        try {
            const auto ds = generate_operator_dataset(
                fluxes[static_cast<std::size_t>(op)], cfg.gen,
                derive_seed(cfg.seed, 0x100 + static_cast<std::uint64_t>(op)));
            save_dataset(ds, data_dir / operator_dir_name(op), cfg.gen);
            ok[static_cast<std::size_t>(op)] = 1;
            pair_counts[static_cast<std::size_t>(op)] = static_cast<long>(ds.pairs.size());
        } catch (const std::exception& e) {
            std::fprintf(stderr, "generate: operator %d (%s) skipped: %s\n", op,
                         encode_flux(fluxes[static_cast<std::size_t>(op)]).c_str(), e.what());
        }
    });

    nlohmann::json dirs = nlohmann::json::array();
    long total_pairs = 0;
    int written = 0;
    for (int op = 0; op < cfg.num_operators; ++op) {
        if (!ok[static_cast<std::size_t>(op)]) continue;
        dirs.push_back(operator_dir_name(op));
        total_pairs += pair_counts[static_cast<std::size_t>(op)];
        ++written;
    }
    write_json(data_dir / "manifest.json",
               nlohmann::json{{"format", "iconcl-datasets-v1"},
                              {"operators", dirs},
                              {"seed", cfg.seed},
                              {"tau", cfg.gen.tau},
                              {"grid_n", cfg.gen.grid_n}});
    std::printf("generate: %d/%d operators, %ld pairs, %d records each -> %s\n", written,
                cfg.num_operators, total_pairs, cfg.gen.num_records, data_dir.c_str());
    return written;
}

namespace {

std::vector<OperatorDataset> load_all_datasets(const std::filesystem::path& data_dir) {
    const auto manifest = read_json(data_dir / "manifest.json");
    std::vector<OperatorDataset> datasets;
    for (const auto& name : manifest.at("operators"))
        datasets.push_back(load_dataset(data_dir / name.get<std::string>()));
    if (datasets.empty()) throw ConfigError("no operator datasets under " + data_dir.string());
    return datasets;
}

} // namespace

int cmd_train(const RunConfig& cfg, bool resume) {
    const auto datasets = load_all_datasets(cfg.output_dir / "data");
    const auto train_dir = cfg.output_dir / "train";
    const TrainResult result = train(cfg.model, cfg.train, datasets, train_dir, resume);
    const LossRow& last = result.history.back();
    std::printf("train: %ld steps, final losses fwd=%.4g rev=%.4g cons=%.4g -> %s\n",
                result.state.step, last.loss_forward, last.loss_reverse, last.loss_consistency,
                train_dir.c_str());
    return 0;
}

int cmd_predict(const PredictArgs& args) {
    const Checkpoint ck = load_checkpoint(args.checkpoint);
    const OperatorDataset ds = load_dataset(args.record_dir);
    if (args.record_index < 0 || args.record_index >= static_cast<int>(ds.records.size()))
        throw ArgumentError("predict: record index out of range");
    const Record& full = ds.records[static_cast<std::size_t>(args.record_index)];

    // Keep the side of the record the plan needs: history up to t0 for
    // forward prediction, the future side for reverse.
    Record rec;
    rec.dt = full.dt;
    const int t0_idx = static_cast<int>(std::llround((args.plan.t0 - full.t0) / full.dt));
    if (t0_idx < 0 || t0_idx >= full.num_frames())
        throw ArgumentError("predict: t0 outside the stored record");
    if (args.plan.direction == Orientation::Forward) {
        rec.t0 = full.t0;
        for (int i = 0; i <= t0_idx; ++i) rec.frames.push_back(full.frames[static_cast<std::size_t>(i)]);
    } else {
        rec.t0 = args.plan.t0;
        for (int i = t0_idx; i < full.num_frames(); ++i)
            rec.frames.push_back(full.frames[static_cast<std::size_t>(i)]);
    }

    std::shared_ptr<const OperatorBackend> backend =
        std::make_shared<const ModelBackend>(ck.params);
    if (args.cov_r > 0.0) backend = with_change_of_variables(backend, args.cov_r);
    const RolloutResult result = recursive_rollout(*backend, rec, args.plan);

    std::filesystem::create_directories(args.out);
    std::vector<float> buf;
    const int n = result.frames.front().n();
    buf.reserve(result.frames.size() * static_cast<std::size_t>(n));
    for (const auto& f : result.frames)
        for (double v : f.values) buf.push_back(static_cast<float>(v));
    write_f32(args.out / "records.f32", buf);
    write_json(args.out / "meta.json",
               nlohmann::json{{"format", "iconcl-predictions-v1"},
                              {"n", n},
                              {"num_records", 1},
                              {"num_frames", result.num_frames()},
                              {"t0", result.t0},
                              {"dt", result.dt},
                              {"direction",
                               args.plan.direction == Orientation::Forward ? "forward" : "reverse"},
                              {"max_stride", args.plan.max_stride},
                              {"horizon", args.plan.horizon},
                              {"examples_per_call", args.plan.examples_per_call},
                              {"seed", args.plan.seed},
                              {"cov_r", args.cov_r},
                              {"model_calls", result.calls},
                              {"source_flux", encode_flux(ds.flux)}});
    std::printf("predict: %d frames (%d model calls) -> %s\n", result.num_frames(), result.calls,
                args.out.c_str());
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint,
             const std::set<std::string>& studies) {
    const Checkpoint ck = load_checkpoint(checkpoint);
    const BackendFactory factory = model_backend_factory(ck.params);
    const auto eval_dir = cfg.output_dir / "eval";
    std::filesystem::create_directories(eval_dir);
    auto wants = [&](const char* s) { return studies.empty() || studies.count(s) > 0; };
    int files = 0;

    if (wants("grid")) {
        GridEvalConfig gc = cfg.grid;
        // Example counts must fit the checkpointed model.
        std::erase_if(gc.example_counts,
                      [&](int J) { return J > ck.params.config.max_pairs - 1; });
        const GridEvalResult res = grid_eval(factory, gc);
        const std::vector<std::pair<std::string, std::string>> meta{
            {"study", "grid"},
            {"points_per_axis", std::to_string(gc.points_per_axis)},
            {"instances_per_operator", std::to_string(gc.instances)}};
        write_curve_csv(eval_dir / study_filename("grid", "forward", "cubic-grid"),
                        res.forward_curve, meta);
        write_curve_csv(eval_dir / study_filename("grid", "reverse", "cubic-grid"),
                        res.reverse_curve, meta);
        files += 2;
    }

    const std::string flux_tag = encode_flux(cfg.study_flux);
    if (wants("generalization")) {
        const auto baselines = standard_baselines(cfg.study_flux);
        const StudyCurves curves = generalization_study(factory, cfg.study_flux, baselines,
                                                        cfg.study);
        auto emit = [&](const std::vector<ErrorCurve>& family, const std::string& study,
                        const std::string& direction) {
            for (const auto& curve : family) {
                write_curve_csv(eval_dir / study_filename(study + "-" + curve.tag, direction,
                                                          flux_tag),
                                curve,
                                {{"study", study},
                                 {"direction", direction},
                                 {"flux", flux_tag},
                                 {"examples", curve.tag}});
                ++files;
            }
        };
        emit(curves.comparison1_forward, "comp1", "forward");
        emit(curves.comparison2_forward, "comp2", "forward");
        emit(curves.comparison1_reverse, "comp1", "reverse");
        emit(curves.comparison2_reverse, "comp2", "reverse");
    }

    if (wants("cov")) {
        const SweepResult sweep =
            change_of_variables_sweep(factory, cfg.study_flux, cfg.cov_r_values, cfg.study);
        for (const auto& curve : sweep.forward) {
            write_curve_csv(eval_dir / study_filename("cov-" + curve.tag, "forward", flux_tag),
                            curve, {{"study", "cov"}, {"setting", curve.tag}});
            ++files;
        }
        for (const auto& curve : sweep.reverse) {
            write_curve_csv(eval_dir / study_filename("cov-" + curve.tag, "reverse", flux_tag),
                            curve, {{"study", "cov"}, {"setting", curve.tag}});
            ++files;
        }
    }

    if (wants("stride")) {
        for (const auto& flux_text : cfg.stride_fluxes) {
            const FluxSpec flux = parse_flux(flux_text);
            const SweepResult sweep = stride_sweep(factory, flux, cfg.stride_values, cfg.study);
            for (const auto& curve : sweep.forward) {
                write_curve_csv(
                    eval_dir / study_filename("stride-" + curve.tag, "forward", flux_text),
                    curve, {{"study", "stride"}, {"setting", curve.tag}, {"flux", flux_text}});
                ++files;
            }
            for (const auto& curve : sweep.reverse) {
                write_curve_csv(
                    eval_dir / study_filename("stride-" + curve.tag, "reverse", flux_text),
                    curve, {{"study", "stride"}, {"setting", curve.tag}, {"flux", flux_text}});
                ++files;
            }
        }
    }

    std::printf("eval: wrote %d curve files -> %s\n", files, eval_dir.c_str());
    return 0;
}

} // namespace iconcl
