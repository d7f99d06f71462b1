#include "iconcl/training.hpp"

#include <cmath>
#include <filesystem>

#include "iconcl/errors.hpp"
#include "iconcl/rng.hpp"
#include "test_harness.hpp"

using namespace iconcl;

namespace {

ModelConfig tiny_model() {
    ModelConfig c;
    c.layers = 1;
    c.heads = 2;
    c.d_model = 16;
    c.d_attn = 16;
    c.d_ff = 32;
    c.max_pairs = 3;
    c.token_stride = 2;
    c.grid_n = 8;
    return c;
}

GenerationConfig tiny_gen() {
    GenerationConfig g;
    g.num_initial = 2;
    g.grid_n = 8;
    g.pool_size = 16;
    g.num_records = 1;
    return g;
}

TrainConfig tiny_train(long steps) {
    TrainConfig t;
    t.total_steps = steps;
    t.warmup_fraction = 0.2;
    t.peak_lr = 3e-4;
    t.batch = 2;
    t.seq_pairs = 3;
    t.seed = 11;
    t.workers = 1;
    return t;
}

GridFunction random_function(int n, Rng& rng) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = rng.normal();
    return make_grid_function(std::move(v), 1.0 / n);
}

TrainingSequence random_sequence(int pairs, int n, Orientation o, Rng& rng) {
    TrainingSequence seq;
    seq.orientation = o;
    for (int i = 0; i < pairs; ++i) {
        CondQoIPair p;
        p.cond = random_function(n, rng);
        p.qoi = random_function(n, rng);
        p.stride = 0.1;
        seq.pairs.push_back(std::move(p));
    }
    return seq;
}

bool rows_equal(const LossRow& a, const LossRow& b) {
    auto same = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    return a.step == b.step && a.lr == b.lr && same(a.loss_forward, b.loss_forward) &&
           same(a.loss_reverse, b.loss_reverse) && same(a.loss_consistency, b.loss_consistency);
}

} // namespace

int main() {
    // Learning-rate schedule against the published configuration.
    {
        TrainConfig cfg;
        cfg.total_steps = 1000000;
        cfg.warmup_fraction = 0.1;
        cfg.peak_lr = 1e-4;
        CHECK_NEAR("lr at step 0", lr_schedule(0, cfg), 0.0, 0.0);
        CHECK_NEAR("lr at 10% of steps is the peak", lr_schedule(100000, cfg), 1e-4, 1e-18);
        CHECK_NEAR("lr at the end", lr_schedule(cfg.total_steps, cfg), 0.0, 1e-18);

        // Continuous, one interior peak, zero endpoints.
        double prev = 0.0, peak = 0.0;
        bool continuous = true;
        long peak_step = 0;
        for (long s = 0; s <= 1000; ++s) {
            TrainConfig small = cfg;
            small.total_steps = 1000;
            const double lr = lr_schedule(s, small);
            if (s > 0 && std::abs(lr - prev) > 1.2e-2 * cfg.peak_lr) continuous = false;
            if (lr > peak) {
                peak = lr;
                peak_step = s;
            }
            prev = lr;
        }
        CHECK("schedule is continuous", continuous);
        CHECK("peaks once at the warmup boundary", peak_step == 100);
        CHECK("step outside range throws",
              harness::throws<ArgumentError>([&] { lr_schedule(-1, cfg); }));
    }

    // Loss values on controlled predictions.
    {
        const ModelConfig mc = tiny_model();
        ModelParams params = init_params(mc, 5);
        Rng rng(2);
        TrainingSequence seq = random_sequence(3, 8, Orientation::Forward, rng);
        const double base = forward_l2_loss(params, seq);
        CHECK("forward loss is finite and positive", std::isfinite(base) && base > 0.0);

        // Offsetting every target by delta shifts an exact-zero-loss model
        // to delta^2; emulate by zeroing params' output and offsetting qoi.
        // Simpler controlled check: duplicating the loss with swapped
        // orientation label must be rejected.
        CHECK("forward loss demands forward orientation", harness::throws<ArgumentError>([&] {
                  TrainingSequence rev = seq;
                  rev.orientation = Orientation::Reverse;
                  forward_l2_loss(params, rev);
              }));
        TrainingSequence rev = seq;
        rev.orientation = Orientation::Reverse;
        for (auto& p : rev.pairs) std::swap(p.cond, p.qoi);
        const double rloss = reverse_l2_loss(params, rev);
        CHECK("reverse loss is finite", std::isfinite(rloss));

        // Swapping twice reproduces the forward loss exactly.
        TrainingSequence back = rev;
        back.orientation = Orientation::Forward;
        for (auto& p : back.pairs) std::swap(p.cond, p.qoi);
        CHECK("double swap reproduces forward loss", forward_l2_loss(params, back) == base);

        // Identical cond/qoi (zero-flux style data): forward and reverse
        // losses coincide.
        TrainingSequence still = seq;
        for (auto& p : still.pairs) p.qoi = p.cond;
        const double f = forward_l2_loss(params, still);
        still.orientation = Orientation::Reverse;
        const double r = reverse_l2_loss(params, still);
        CHECK("zero-flux data: forward equals reverse loss", f == r);
    }

    // Constant-offset loss: build a sequence whose qoi differs from a
    // perfectly-predictable value by delta. Using a zero-width model is not
    // available, so validate the quadratic structure instead:
    // loss(target + delta) - 2 loss(target) + loss(target - delta) = 2 delta^2.
    {
        const ModelConfig mc = tiny_model();
        ModelParams params = init_params(mc, 6);
        Rng rng(3);
        TrainingSequence seq = random_sequence(3, 8, Orientation::Forward, rng);
        // Shift only the final pair's QoI: its query block cannot see it,
        // so predictions are unchanged and the loss must be exactly
        // quadratic with curvature 2/(I-1).
        auto shifted = [&](double delta) {
            TrainingSequence s = seq;
            for (auto& v : s.pairs.back().qoi.values) v += delta;
            return forward_l2_loss(params, s);
        };
        const double lhs = shifted(0.35) - 2 * shifted(0.0) + shifted(-0.35);
        CHECK_NEAR("loss is quadratic in the targets", lhs, 2 * 0.35 * 0.35 / 2.0, 1e-9);
    }

    // AdamW: zero-gradient step is pure decoupled weight decay.
    {
        TrainConfig cfg;
        cfg.peak_lr = 1e-3;
        cfg.weight_decay = 1e-4;
        Eigen::VectorXd p(3);
        p << 1.0, -2.0, 0.5;
        const Eigen::VectorXd p0 = p;
        AdamWState state;
        adamw_step(p, Eigen::VectorXd::Zero(3), state, 1e-3, cfg);
        double worst = 0.0;
        for (int i = 0; i < 3; ++i)
            worst = std::max(worst, std::abs(p[i] - (p0[i] - 1e-3 * 1e-4 * p0[i])));
        CHECK_LE("zero-grad step is exactly -lr*wd*p", worst, 0.0);

        // Gradient direction: a positive gradient lowers the coordinate.
        Eigen::VectorXd g(3);
        g << 1.0, 0.0, -1.0;
        adamw_step(p, g, state, 1e-3, cfg);
        CHECK("adam moves against the gradient", p[0] < p0[0] && p[2] > 0.5 - 1e-3);
    }

    // Consistency loss: gradient against finite differences with the
    // surrogate frozen (the stop-gradient contract).
    {
        const ModelConfig mc = tiny_model();
        const ModelParams frozen = init_params(mc, 7);
        ModelParams live = init_params(mc, 7);
        Rng rng(4);
        TrainingSequence seq = random_sequence(3, 8, Orientation::Reverse, rng);

        Eigen::VectorXd grad = Eigen::VectorXd::Zero(live.store.size());
        const double loss = consistency_loss_split(live, frozen, seq, &grad);
        CHECK("consistency loss finite", std::isfinite(loss) && loss >= 0.0);

        const double h = 1e-5;
        double worst_rel = 0.0, worst_abs = 0.0;
        // Spot-check a spread of coordinates (full sweep is the model test's
        // job; the surrogate chain doubles the cost here).
        for (long i = 0; i < live.store.size(); i += 7) {
            const double keep = live.store.flat[i];
            live.store.flat[i] = keep + h;
            const double up = consistency_loss_split(live, frozen, seq, nullptr);
            live.store.flat[i] = keep - h;
            const double down = consistency_loss_split(live, frozen, seq, nullptr);
            live.store.flat[i] = keep;
            const double fd = (up - down) / (2 * h);
            const double scale = std::abs(grad[i]) + std::abs(fd);
            if (scale >= 1e-6)
                worst_rel = std::max(worst_rel, std::abs(grad[i] - fd) / scale);
            else
                worst_abs = std::max(worst_abs, std::abs(grad[i] - fd));
        }
        CHECK_LE("consistency gradient matches FD (frozen surrogate)", worst_rel, 1e-4);
        CHECK_LE("consistency near-zero gradients agree", worst_abs, 1e-8);

        // Wrong orientation is rejected.
        CHECK("consistency demands reverse orientation", harness::throws<ArgumentError>([&] {
                  TrainingSequence fwd = seq;
                  fwd.orientation = Orientation::Forward;
                  consistency_loss(live, fwd);
              }));
    }

    // Training loop: determinism, CSV, resume.
    {
        const ModelConfig mc = tiny_model();
        std::vector<OperatorDataset> data;
        data.push_back(generate_operator_dataset(FluxSpec::cubic(0.3, 0, 0.2), tiny_gen(), 1));
        data.push_back(generate_operator_dataset(FluxSpec::cubic(0, 0, 0), tiny_gen(), 2));

        const TrainResult a = train(mc, tiny_train(20), data);
        const TrainResult b = train(mc, tiny_train(20), data);
        CHECK("training is deterministic (params bitwise)",
              (a.state.params.store.flat - b.state.params.store.flat).cwiseAbs().maxCoeff() == 0.0);
        CHECK("history rows match", a.history.size() == b.history.size() &&
                                        rows_equal(a.history.back(), b.history.back()));

        // Thread count must not change results (fixed-order reduction).
        TrainConfig two = tiny_train(20);
        two.workers = 2;
        const TrainResult c = train(mc, two, data);
        CHECK("worker count does not change results",
              (a.state.params.store.flat - c.state.params.store.flat).cwiseAbs().maxCoeff() == 0.0);

        // Resume: a session halted at step 10 then resumed matches the
        // uninterrupted 20-step run.
        const auto dir = std::filesystem::temp_directory_path() / "iconcl_test_training";
        std::filesystem::remove_all(dir);
        TrainConfig halted = tiny_train(20);
        halted.halt_at_step = 10;
        train(mc, halted, data, dir);
        const TrainResult resumed = train(mc, tiny_train(20), data, dir, true);
        CHECK("resumed run matches uninterrupted run bitwise",
              (a.state.params.store.flat - resumed.state.params.store.flat)
                      .cwiseAbs()
                      .maxCoeff() == 0.0);
        CHECK("resumed history covers the tail",
              resumed.history.front().step == 11 &&
                  rows_equal(resumed.history.back(), a.history.back()));

        // CSV round trip.
        write_loss_csv(dir / "loss.csv", a.history);
        const auto rows = read_loss_csv(dir / "loss.csv");
        CHECK("loss CSV round trip", rows.size() == a.history.size() &&
                                         rows_equal(rows.front(), a.history.front()) &&
                                         rows_equal(rows.back(), a.history.back()));
        std::filesystem::remove_all(dir);

        // Forward-only mix never logs reverse losses.
        TrainConfig fwd_only = tiny_train(10);
        fwd_only.mix = LossMix::ForwardOnly;
        const TrainResult d = train(mc, fwd_only, data);
        bool no_reverse = true;
        for (const auto& row : d.history)
            no_reverse = no_reverse && std::isnan(row.loss_reverse) &&
                         std::isfinite(row.loss_forward);
        CHECK("fwd-only mix never samples reverse", no_reverse);

        // Consistency mix logs both forward and consistency losses.
        TrainConfig cons = tiny_train(4);
        cons.mix = LossMix::ForwardL2Consistency;
        const TrainResult e = train(mc, cons, data);
        bool has_both = true;
        for (const auto& row : e.history)
            has_both = has_both && std::isfinite(row.loss_forward) &&
                       std::isfinite(row.loss_consistency);
        CHECK("consistency mix logs both loss families", has_both);
    }

    return harness::summary("test_training");
}
