#include "iconcl/model.hpp"

#include <cmath>
#include <filesystem>

#include "iconcl/errors.hpp"
#include "iconcl/rng.hpp"
#include "iconcl/training.hpp"
#include "test_harness.hpp"

using namespace iconcl;

namespace {

// Tiny instance for structural and gradient tests: width 16, 2 pairs,
// 4 tokens per function.
ModelConfig tiny_config() {
    ModelConfig c;
    c.layers = 2;
    c.heads = 2;
    c.d_model = 16;
    c.d_attn = 16;
    c.d_ff = 32;
    c.max_pairs = 2;
    c.token_stride = 2;
    c.grid_n = 8;
    return c;
}

GridFunction random_function(int n, Rng& rng, double scale = 1.0) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = scale * rng.normal();
    return make_grid_function(std::move(v), 1.0 / n);
}

std::vector<CondQoIPair> random_pairs(int count, int n, Rng& rng) {
    std::vector<CondQoIPair> pairs;
    for (int i = 0; i < count; ++i) {
        CondQoIPair p;
        p.cond = random_function(n, rng);
        p.qoi = random_function(n, rng);
        p.stride = 0.1;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

bool bitwise_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

// Forward L2 loss of a training prompt, for finite differencing.
double prompt_loss(const ModelParams& params, const TrainingPrompt& tp) {
    const Predictions preds = forward(params, tp.prompt);
    double loss = 0.0;
    for (std::size_t b = 0; b < preds.values.size(); ++b) {
        const auto& t = tp.targets[b];
        for (Eigen::Index k = 0; k < preds.values[b].size(); ++k) {
            const double r = preds.values[b][k] - t[static_cast<std::size_t>(k)];
            loss += r * r / static_cast<double>(t.size());
        }
    }
    return loss / static_cast<double>(preds.values.size());
}

} // namespace

int main() {
    // init_params: shape echo and determinism.
    {
        const ModelConfig c = tiny_config();
        const ModelParams a = init_params(c, 7);
        const ModelParams b = init_params(c, 7);
        CHECK("same seed gives bitwise-identical parameters",
              bitwise_equal(a.store.flat, b.store.flat));
        const ModelParams d = init_params(c, 8);
        CHECK("different seed differs", !bitwise_equal(a.store.flat, d.store.flat));

        ModelConfig paper;
        paper.layers = 6;
        paper.heads = 8;
        paper.d_model = 256;
        paper.d_attn = 256;
        paper.d_ff = 1024;
        paper.max_pairs = 6;
        paper.token_stride = 1;
        paper.grid_n = 100;
        const ParamStore store = build_param_store(paper);
        CHECK("paper config builds (6 layers, 8 heads, 256/256/1024)",
              store.size() > 0 && store.tensors().size() == 3 + 6 * 16 + 4);
        CHECK("bad head split rejected", harness::throws<ConfigError>([] {
                  ModelConfig bad;
                  bad.heads = 3;
                  bad.d_attn = 64;
                  build_param_store(bad);
              }));
    }

    // Mask rules on the training layout.
    {
        Rng rng(1);
        const auto pairs = random_pairs(2, 8, rng);
        const TrainingPrompt tp = build_training_prompt(pairs, 2); // blocks C1 Q1 C2 R2 Q2
        const auto& blocks = tp.prompt.blocks;
        const MaskMatrix mask = attention_mask(blocks, tp.prompt.seq_len());

        auto block_sees = [&](int tb, int sb) {
            // Whole-block visibility (true when every token pair is visible).
            for (int t = blocks[tb].start; t < blocks[tb].start + blocks[tb].length; ++t)
                for (int s = blocks[sb].start; s < blocks[sb].start + blocks[sb].length; ++s)
                    if (!mask(t, s)) return false;
            return true;
        };
        auto block_blind = [&](int tb, int sb) {
            for (int t = blocks[tb].start; t < blocks[tb].start + blocks[tb].length; ++t)
                for (int s = blocks[sb].start; s < blocks[sb].start + blocks[sb].length; ++s)
                    if (mask(t, s)) return false;
            return true;
        };

        // Order: 0=C1 1=Q1 2=C2 3=R2 4=Q2
        CHECK("R2 sees C1", block_sees(3, 0));
        CHECK("R2 sees Q1", block_sees(3, 1));
        CHECK("R2 sees C2", block_sees(3, 2));
        CHECK("R2 blind to Q2", block_blind(3, 4));
        CHECK("Q1 blind to C2", block_blind(1, 2));
        CHECK("C1 sees itself", block_sees(0, 0));
        CHECK("Q2 sees Q2", block_sees(4, 4));
        CHECK("C2 blind to Q2", block_blind(2, 4));

        // Query tokens see themselves only, and are invisible to everyone.
        bool self_only = true, invisible = true;
        const Block& r2 = blocks[3];
        for (int t = r2.start; t < r2.start + r2.length; ++t) {
            for (int s = r2.start; s < r2.start + r2.length; ++s)
                if (s != t && mask(t, s)) self_only = false;
            if (!mask(t, t)) self_only = false;
            for (int q = 0; q < tp.prompt.seq_len(); ++q)
                if (q != t && mask(q, t)) invisible = false;
        }
        CHECK("query tokens attend to themselves only", self_only);
        CHECK("query tokens invisible to all others", invisible);
    }

    // Forward shapes: training layout yields I-1 prediction vectors.
    {
        ModelConfig c = tiny_config();
        c.max_pairs = 4;
        const ModelParams params = init_params(c, 3);
        Rng rng(2);
        const auto pairs = random_pairs(4, 8, rng);
        const TrainingPrompt tp = build_training_prompt(pairs, 2);
        const Predictions preds = forward(params, tp.prompt);
        CHECK("training layout: 3 prediction vectors of 4 values",
              preds.values.size() == 3 && preds.values[0].size() == 4 &&
                  preds.pair_index == std::vector<int>({2, 3, 4}));

        const std::vector<CondQoIPair> ex(pairs.begin(), pairs.begin() + 2);
        const PromptSequence ip = build_prompt(ex, pairs[3].cond, 2);
        const Predictions ipreds = forward(params, ip);
        CHECK("inference layout: exactly one prediction vector", ipreds.values.size() == 1);
    }

    // Causality: predictions for pair i are bitwise invariant to changes in
    // pairs j > i and in Q_i.
    {
        ModelConfig c = tiny_config();
        c.max_pairs = 4;
        const ModelParams params = init_params(c, 5);
        Rng rng(11);
        bool all_ok = true;
        for (int trial = 0; trial < 20 && all_ok; ++trial) {
            auto pairs = random_pairs(4, 8, rng);
            const TrainingPrompt base = build_training_prompt(pairs, 2);
            const Predictions pb = forward(params, base.prompt);

            for (int i = 2; i <= 4; ++i) {
                // Perturb everything later than pair i plus pair i's QoI.
                auto mutated = pairs;
                for (int j = i; j <= 3; ++j) {
                    mutated[static_cast<std::size_t>(j)].cond = random_function(8, rng);
                    mutated[static_cast<std::size_t>(j)].qoi = random_function(8, rng);
                }
                mutated[static_cast<std::size_t>(i - 1)].qoi = random_function(8, rng);
                const TrainingPrompt other = build_training_prompt(mutated, 2);
                const Predictions po = forward(params, other.prompt);
                // Query block for pair i is at index i-2.
                all_ok = all_ok && bitwise_equal(pb.values[static_cast<std::size_t>(i - 2)],
                                                 po.values[static_cast<std::size_t>(i - 2)]);
            }
        }
        CHECK("causality: later pairs and own QoI never leak (bitwise)", all_ok);
    }

    // Permutation consistency within a condition block.
    {
        ModelConfig c = tiny_config();
        const ModelParams params = init_params(c, 9);
        Rng rng(13);
        const auto pairs = random_pairs(2, 8, rng);
        const TrainingPrompt base = build_training_prompt(pairs, 2);
        PromptSequence shuffled = base.prompt;
        const Block& c1 = shuffled.blocks[0];
        std::swap(shuffled.tokens[static_cast<std::size_t>(c1.start)],
                  shuffled.tokens[static_cast<std::size_t>(c1.start + 3)]);
        std::swap(shuffled.tokens[static_cast<std::size_t>(c1.start + 1)],
                  shuffled.tokens[static_cast<std::size_t>(c1.start + 2)]);
        const Predictions a = forward(params, base.prompt);
        const Predictions b = forward(params, shuffled);
        double worst = 0.0;
        for (std::size_t q = 0; q < a.values.size(); ++q)
            worst = std::max(worst, (a.values[q] - b.values[q]).cwiseAbs().maxCoeff());
        CHECK_LE("within-block token order is void", worst, 1e-12);
    }

    // Gradient check against central finite differences (width-16, 2-pair).
    {
        const ModelConfig c = tiny_config();
        const ModelParams params = init_params(c, 21);
        Rng rng(17);
        const auto pairs = random_pairs(2, 8, rng);
        const TrainingPrompt tp = build_training_prompt(pairs, 2);

        ModelWorkspace ws;
        const Predictions preds = forward_cached(params, tp.prompt, ws);
        std::vector<Eigen::VectorXd> dvalues(preds.values.size());
        for (std::size_t b = 0; b < preds.values.size(); ++b) {
            const auto& t = tp.targets[b];
            const Eigen::Map<const Eigen::VectorXd> tv(t.data(),
                                                       static_cast<Eigen::Index>(t.size()));
            dvalues[b] = 2.0 / (static_cast<double>(t.size()) * preds.values.size()) *
                         (preds.values[b] - tv);
        }
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.store.size());
        backward(params, ws, dvalues, grad);

        ModelParams probe = params;
        const double h = 1e-5;
        double worst_rel = 0.0, worst_abs = 0.0;
        for (long i = 0; i < params.store.size(); ++i) {
            const double keep = probe.store.flat[i];
            probe.store.flat[i] = keep + h;
            const double up = prompt_loss(probe, tp);
            probe.store.flat[i] = keep - h;
            const double down = prompt_loss(probe, tp);
            probe.store.flat[i] = keep;
            const double fd = (up - down) / (2 * h);
            const double scale = std::abs(grad[i]) + std::abs(fd);
            if (scale >= 1e-6)
                worst_rel = std::max(worst_rel, std::abs(grad[i] - fd) / scale);
            else
                worst_abs = std::max(worst_abs, std::abs(grad[i] - fd));
        }
        CHECK_LE("analytic gradients match finite differences", worst_rel, 1e-4);
        CHECK_LE("near-zero gradients agree absolutely", worst_abs, 1e-8);
    }

    // Checkpoint round trip.
    {
        const auto dir = std::filesystem::temp_directory_path() / "iconcl_test_model" / "ck";
        std::filesystem::remove_all(dir.parent_path());
        const ModelConfig c = tiny_config();
        const ModelParams params = init_params(c, 31);
        save_checkpoint(params, dir, 123);
        const Checkpoint ck = load_checkpoint(dir);
        CHECK("step survives", ck.step == 123);
        CHECK("config survives", ck.params.config.d_model == 16 && ck.params.config.max_pairs == 2);
        CHECK_LE("parameters survive to f32 precision",
                 (ck.params.store.flat - params.store.flat).cwiseAbs().maxCoeff(), 1e-7);
        std::filesystem::remove_all(dir.parent_path());
    }

    // Error paths.
    {
        const ModelParams params = init_params(tiny_config(), 1);
        Rng rng(3);
        auto pairs = random_pairs(2, 8, rng);
        PromptSequence prompt = build_training_prompt(pairs, 2).prompt;
        prompt.tokens[3].value = std::numeric_limits<double>::quiet_NaN();
        CHECK("non-finite token throws",
              harness::throws<NumericError>([&] { forward(params, prompt); }));

        auto big = random_pairs(3, 8, rng); // pair_index 3 > max_pairs 2
        CHECK("pair index beyond capacity throws", harness::throws<ArgumentError>([&] {
                  forward(params, build_training_prompt(big, 2).prompt);
              }));
    }

    return harness::summary("test_model");
}
