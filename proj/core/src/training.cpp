#include "iconcl/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "iconcl/errors.hpp"
#include "iconcl/io.hpp"
#include "iconcl/parallel.hpp"
#include "iconcl/rng.hpp"

namespace iconcl {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct SequenceResult {
    double loss_forward = std::numeric_limits<double>::quiet_NaN();
    double loss_reverse = std::numeric_limits<double>::quiet_NaN();
    double loss_consistency = std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
};

// L2 loss over all query blocks of a training prompt; fills dvalues with the
// loss gradient when grads != nullptr.
double l2_parts(const Predictions& preds, const std::vector<std::vector<double>>& targets,
                std::vector<Eigen::VectorXd>* grads) {
    const auto blocks = preds.values.size();
    if (targets.size() != blocks) throw ArgumentError("loss: target/query block mismatch");
    double loss = 0.0;
    if (grads) grads->resize(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        const auto& p = preds.values[b];
        const Eigen::Map<const Eigen::VectorXd> t(targets[b].data(),
                                                  static_cast<Eigen::Index>(targets[b].size()));
        if (p.size() != t.size()) throw ArgumentError("loss: prediction/target length mismatch");
        const Eigen::VectorXd r = p - t;
        loss += r.squaredNorm() / static_cast<double>(r.size());
        if (grads)
            (*grads)[b] = 2.0 / (static_cast<double>(r.size()) * static_cast<double>(blocks)) * r;
    }
    return loss / static_cast<double>(blocks);
}

double l2_sequence(const ModelParams& params, const TrainingSequence& seq,
                   Eigen::VectorXd* grad, ModelWorkspace& ws) {
    const TrainingPrompt tp = build_training_prompt(seq.pairs, params.config.token_stride);
    const Predictions preds = forward_cached(params, tp.prompt, ws);
    std::vector<Eigen::VectorXd> dvalues;
    const double loss = l2_parts(preds, tp.targets, grad ? &dvalues : nullptr);
    if (grad) backward(params, ws, dvalues, *grad);
    return loss;
}

// Consistency loss with gradient. The surrogate passes accumulate their
// parameter gradients into a scratch buffer that is thrown away, which is
// the stop-gradient contract; only the input-value path feeds back into the
// main pass.
double consistency_split(const ModelParams& params, const ModelParams& frozen,
                         const TrainingSequence& seq, Eigen::VectorXd* grad,
                         ModelWorkspace& ws) {
    if (seq.orientation != Orientation::Reverse)
        throw ArgumentError("consistency loss: sequence must be reverse-oriented");
    const int stride = params.config.token_stride;
    const TrainingPrompt tp = build_training_prompt(seq.pairs, stride);
    const Predictions preds = forward_cached(params, tp.prompt, ws);

    const auto I = seq.pairs.size();
    const auto blocks = preds.values.size(); // I-1 query blocks
    std::vector<Eigen::VectorXd> main_dvalues(blocks);

    Eigen::VectorXd frozen_scratch;
    if (grad) frozen_scratch = Eigen::VectorXd::Zero(frozen.store.size());

    double loss = 0.0;
    ModelWorkspace sws;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t i = b + 1; // 0-based index of the predicted pair
        // Forward-operator examples: every other pair, swapped back.
        std::vector<CondQoIPair> examples;
        examples.reserve(I - 1);
        for (std::size_t j = 0; j < I; ++j) {
            if (j == i) continue;
            CondQoIPair p = seq.pairs[j];
            std::swap(p.cond, p.qoi);
            examples.push_back(std::move(p));
        }
        // The prediction becomes the surrogate's question condition. Token
        // values equal the prediction exactly; intermediate cells from the
        // periodic upsample are never tokenized.
        const auto& pv = preds.values[b];
        GridFunction coarse = make_grid_function(
            std::vector<double>(pv.data(), pv.data() + pv.size()),
            1.0 / static_cast<double>(pv.size()));
        const GridFunction question = upsample_linear_periodic(coarse, stride);

        const PromptSequence sp = build_prompt(examples, question, stride);
        const Predictions spreds = forward_cached(frozen, sp, sws);

        const std::vector<double> cond_tokens = token_values(seq.pairs[i].cond, stride);
        const Eigen::Map<const Eigen::VectorXd> target(
            cond_tokens.data(), static_cast<Eigen::Index>(cond_tokens.size()));
        const Eigen::VectorXd r = spreds.values[0] - target;
        loss += r.squaredNorm() / static_cast<double>(r.size()) / static_cast<double>(blocks);

        if (grad) {
            std::vector<Eigen::VectorXd> sdval{
                2.0 / (static_cast<double>(r.size()) * static_cast<double>(blocks)) * r};
            const Eigen::VectorXd token_grads = backward(frozen, sws, sdval, frozen_scratch);
            // Question condition block is the second-to-last block.
            const Block& qblk = sp.blocks[sp.blocks.size() - 2];
            main_dvalues[b] = token_grads.segment(qblk.start, qblk.length);
        }
    }
    if (grad) backward(params, ws, main_dvalues, *grad);
    return loss;
}

void require_orientation(const TrainingSequence& seq, Orientation want, const char* what) {
    if (seq.orientation != want)
        throw ArgumentError(std::string(what) + ": wrong sequence orientation");
}

} // namespace

double lr_schedule(long step, const TrainConfig& cfg) {
    if (step < 0 || step > cfg.total_steps) throw ArgumentError("lr_schedule: step out of range");
    if (!(cfg.warmup_fraction > 0.0 && cfg.warmup_fraction < 1.0))
        throw ConfigError("lr_schedule: warmup fraction must be in (0,1)");
    const double warmup = cfg.warmup_fraction * static_cast<double>(cfg.total_steps);
    if (static_cast<double>(step) <= warmup)
        return cfg.peak_lr * static_cast<double>(step) / warmup;
    const double progress =
        (static_cast<double>(step) - warmup) / (static_cast<double>(cfg.total_steps) - warmup);
    return cfg.peak_lr * 0.5 * (1.0 + std::cos(kPi * progress));
}

double forward_l2_loss(const ModelParams& params, const TrainingSequence& seq) {
    require_orientation(seq, Orientation::Forward, "forward_l2_loss");
    ModelWorkspace ws;
    return l2_sequence(params, seq, nullptr, ws);
}

double reverse_l2_loss(const ModelParams& params, const TrainingSequence& seq) {
    require_orientation(seq, Orientation::Reverse, "reverse_l2_loss");
    ModelWorkspace ws;
    return l2_sequence(params, seq, nullptr, ws);
}

double consistency_loss(const ModelParams& params, const TrainingSequence& seq) {
    ModelWorkspace ws;
    return consistency_split(params, params, seq, nullptr, ws);
}

double consistency_loss_split(const ModelParams& live, const ModelParams& frozen,
                              const TrainingSequence& seq, Eigen::VectorXd* grad) {
    ModelWorkspace ws;
    return consistency_split(live, frozen, seq, grad, ws);
}

void adamw_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamWState& state,
                double lr, const TrainConfig& cfg, double eps) {
    if (state.m.size() != params.size()) {
        state.m = Eigen::VectorXd::Zero(params.size());
        state.v = Eigen::VectorXd::Zero(params.size());
        state.t = 0;
    }
    state.t += 1;
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    params.array() -= lr * ((state.m.array() / bc1) /
                                ((state.v.array() / bc2).sqrt() + eps) +
                            cfg.weight_decay * params.array());
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossRow>& history) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "step,lr,loss_forward,loss_reverse,loss_consistency\n";
    char buf[256];
    for (const auto& row : history) {
        std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g\n", row.step, row.lr,
                      row.loss_forward, row.loss_reverse, row.loss_consistency);
        out << buf;
    }
}

std::vector<LossRow> read_loss_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    std::vector<LossRow> rows;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        LossRow row;
        if (std::sscanf(line.c_str(), "%ld,%lg,%lg,%lg,%lg", &row.step, &row.lr,
                        &row.loss_forward, &row.loss_reverse, &row.loss_consistency) == 5)
            rows.push_back(row);
    }
    return rows;
}

void save_train_state(const TrainState& state, const std::filesystem::path& dir) {
    save_checkpoint(state.params, dir, state.step);
    const long n = state.params.store.size();
    std::ofstream out(dir / "train_state.f64", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + (dir / "train_state.f64").string());
    auto put = [&](const Eigen::VectorXd& v) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(n)));
    };
    put(state.params.store.flat);
    put(state.opt.m.size() == n ? state.opt.m : Eigen::VectorXd::Zero(n).eval());
    put(state.opt.v.size() == n ? state.opt.v : Eigen::VectorXd::Zero(n).eval());
    if (!out) throw IoError("short write: train_state.f64");
    write_json(dir / "train_state.json", nlohmann::json{{"step", state.step}, {"adam_t", state.opt.t}});
}

TrainState load_train_state(const std::filesystem::path& dir) {
    Checkpoint ck = load_checkpoint(dir);
    TrainState state{std::move(ck.params), AdamWState{}, ck.step};
    const long n = state.params.store.size();
    std::ifstream in(dir / "train_state.f64", std::ios::binary);
    if (!in) throw IoError("cannot open: " + (dir / "train_state.f64").string());
    auto get = [&](Eigen::VectorXd& v) {
        v.resize(n);
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(n)));
    };
    get(state.params.store.flat); // float64 copy overrides the f32 checkpoint
    get(state.opt.m);
    get(state.opt.v);
    if (!in) throw IoError("short read: train_state.f64");
    const auto meta = read_json(dir / "train_state.json");
    state.step = meta.at("step").get<long>();
    state.opt.t = meta.at("adam_t").get<long>();
    return state;
}

TrainResult train(const ModelConfig& model_cfg, const TrainConfig& cfg,
                  const std::vector<OperatorDataset>& datasets,
                  const std::filesystem::path& out_dir, bool resume) {
    if (datasets.empty()) throw ArgumentError("train: no datasets");
    if (cfg.batch < 1) throw ArgumentError("train: batch must be >= 1");
    for (const auto& ds : datasets)
        if (static_cast<int>(ds.pairs.size()) < cfg.seq_pairs)
            throw ArgumentError("train: operator pool smaller than sequence length");

    TrainResult result{TrainState{init_params(model_cfg, cfg.seed), AdamWState{}, 0}, {}};
    if (resume) {
        if (out_dir.empty()) throw ArgumentError("train: resume requires an output directory");
        result.state = load_train_state(out_dir / "checkpoint");
    }
    ModelParams& params = result.state.params;
    AdamWState& opt = result.state.opt;

    const int workers = cfg.workers > 0 ? cfg.workers : default_worker_count();
    const int B = cfg.batch;
    std::vector<Eigen::VectorXd> grads(static_cast<std::size_t>(B));
    std::vector<SequenceResult> seq_results(static_cast<std::size_t>(B));
    std::vector<ModelWorkspace> workspaces(static_cast<std::size_t>(B));

    for (long step = result.state.step + 1; step <= cfg.total_steps; ++step) {
        const double lr = lr_schedule(step, cfg);
        const std::uint64_t step_root = derive_seed(cfg.seed, static_cast<std::uint64_t>(step));

        parallel_for(B, workers, [&](int b) {
            Eigen::VectorXd& g = grads[static_cast<std::size_t>(b)];
            if (g.size() != params.store.size()) g.resize(params.store.size());
            g.setZero();
            SequenceResult& res = seq_results[static_cast<std::size_t>(b)];
            res = SequenceResult{};

            const std::uint64_t seq_seed = derive_seed(step_root, static_cast<std::uint64_t>(b));
            Rng rng(derive_seed(seq_seed, 0xba7c4));
            const auto op = static_cast<std::size_t>(rng.below(datasets.size()));
            ModelWorkspace& ws = workspaces[static_cast<std::size_t>(b)];

            switch (cfg.mix) {
                case LossMix::ForwardOnly: {
                    const auto seq = sample_training_sequence(datasets[op], cfg.seq_pairs,
                                                              Orientation::Forward, seq_seed);
                    res.loss_forward = l2_sequence(params, seq, &g, ws);
                    res.total = res.loss_forward;
                    break;
                }
                case LossMix::ForwardReverseL2: {
                    const Orientation o =
                        rng.uniform() < 0.5 ? Orientation::Forward : Orientation::Reverse;
                    const auto seq = sample_training_sequence(datasets[op], cfg.seq_pairs, o, seq_seed);
                    const double loss = l2_sequence(params, seq, &g, ws);
                    if (o == Orientation::Forward)
                        res.loss_forward = loss;
                    else
                        res.loss_reverse = loss;
                    res.total = loss;
                    break;
                }
                case LossMix::ForwardL2Consistency: {
                    // The same drawn pairs feed both the forward L2 term and
                    // the reverse-oriented consistency term.
                    const auto fwd = sample_training_sequence(datasets[op], cfg.seq_pairs,
                                                              Orientation::Forward, seq_seed);
                    TrainingSequence rev = fwd;
                    rev.orientation = Orientation::Reverse;
                    for (auto& p : rev.pairs) std::swap(p.cond, p.qoi);
                    res.loss_forward = l2_sequence(params, fwd, &g, ws);
                    res.loss_consistency = consistency_split(params, params, rev, &g, ws);
                    res.total = res.loss_forward + res.loss_consistency;
                    break;
                }
            }
        });

        // Fixed-order reduction keeps results identical for any worker count.
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.store.size());
        for (int b = 0; b < B; ++b) grad += grads[static_cast<std::size_t>(b)];
        grad /= static_cast<double>(B);

        double batch_total = 0.0;
        double fsum = 0.0, rsum = 0.0, csum = 0.0;
        int fcnt = 0, rcnt = 0, ccnt = 0;
        for (const auto& res : seq_results) {
            batch_total += res.total;
            if (std::isfinite(res.loss_forward)) { fsum += res.loss_forward; ++fcnt; }
            if (std::isfinite(res.loss_reverse)) { rsum += res.loss_reverse; ++rcnt; }
            if (std::isfinite(res.loss_consistency)) { csum += res.loss_consistency; ++ccnt; }
        }
        if (!std::isfinite(batch_total)) {
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                save_train_state(result.state, out_dir / "checkpoint");
            }
            throw NumericError("train: non-finite loss at step " + std::to_string(step) +
                               "; last good checkpoint written");
        }

        const double norm = grad.norm();
        if (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) grad *= cfg.clip_norm / norm;
        adamw_step(params.store.flat, grad, opt, lr, cfg);
        result.state.step = step;

        if (step % cfg.log_every == 0 || step == cfg.total_steps) {
            LossRow row;
            row.step = step;
            row.lr = lr;
            if (fcnt) row.loss_forward = fsum / fcnt;
            if (rcnt) row.loss_reverse = rsum / rcnt;
            if (ccnt) row.loss_consistency = csum / ccnt;
            result.history.push_back(row);
        }
        if (!out_dir.empty() && cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) {
            std::filesystem::create_directories(out_dir);
            save_train_state(result.state, out_dir / "checkpoint");
            write_loss_csv(out_dir / "loss.csv", result.history);
        }
        if (cfg.halt_at_step > 0 && step >= cfg.halt_at_step) break;
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        save_train_state(result.state, out_dir / "checkpoint");
        write_loss_csv(out_dir / "loss.csv", result.history);
    }
    return result;
}

} // namespace iconcl
