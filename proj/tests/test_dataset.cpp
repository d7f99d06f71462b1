#include "iconcl/dataset.hpp"

#include <cstdio>
#include <filesystem>

#include "iconcl/errors.hpp"
#include "iconcl/solver.hpp"
#include "test_harness.hpp"

using namespace iconcl;

namespace {

GenerationConfig desk_config() {
    GenerationConfig cfg;
    cfg.num_initial = 4;
    cfg.pool_size = 64;
    cfg.num_records = 2;
    return cfg;
}

std::filesystem::path temp_dir(const char* leaf) {
    const auto dir = std::filesystem::temp_directory_path() / "iconcl_test_dataset" / leaf;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

int main() {
    // Pool arithmetic: N initial conditions give (collect/dt + 1)*N pairs.
    {
        const GenerationConfig cfg = desk_config();
        const OperatorDataset ds =
            generate_operator_dataset(FluxSpec::cubic(0.2, -0.4, 0.6), cfg, 11);
        CHECK("available pairs 801*N", ds.pairs_available == 801L * 4);
        CHECK("stored pool size", static_cast<int>(ds.pairs.size()) == 64);
        CHECK("records kept", static_cast<int>(ds.records.size()) == 2);
        CHECK("record frames span the horizon", ds.records[0].num_frames() == 51);

        // Every stored pair round-trips the solver: qoi = F_tau[cond].
        double worst = 0.0;
        for (int i = 0; i < 8; ++i) {
            const auto& p = ds.pairs[static_cast<std::size_t>(i * 7)];
            worst = std::max(worst, mean_abs_diff(exact_forward(p.cond, ds.flux, ds.tau), p.qoi));
        }
        CHECK_LE("pairs round-trip the forward operator", worst, 1e-8);
    }

    // Zero flux: every pair has cond == qoi.
    {
        const OperatorDataset ds =
            generate_operator_dataset(FluxSpec::cubic(0, 0, 0), desk_config(), 5);
        double worst = 0.0;
        for (const auto& p : ds.pairs) worst = std::max(worst, max_abs_diff(p.cond, p.qoi));
        CHECK_LE("zero flux pairs are identities", worst, 1e-12);
    }

    // Downsampling determinism.
    {
        const auto a = generate_operator_dataset(FluxSpec::cubic(0.1, 0.1, 0.1), desk_config(), 42);
        const auto b = generate_operator_dataset(FluxSpec::cubic(0.1, 0.1, 0.1), desk_config(), 42);
        const auto c = generate_operator_dataset(FluxSpec::cubic(0.1, 0.1, 0.1), desk_config(), 43);
        double same = 0.0, diff = 0.0;
        for (std::size_t i = 0; i < a.pairs.size(); ++i) {
            same = std::max(same, max_abs_diff(a.pairs[i].cond, b.pairs[i].cond));
            diff += mean_abs_diff(a.pairs[i].cond, c.pairs[i].cond);
        }
        CHECK_LE("same seed reproduces the pool", same, 0.0);
        CHECK("different seed changes the pool", diff > 0.0);
    }

    // sample_training_sequence.
    {
        const auto ds = generate_operator_dataset(FluxSpec::cubic(0.3, 0, 0.3), desk_config(), 7);
        const auto fwd = sample_training_sequence(ds, 4, Orientation::Forward, 99);
        CHECK("sequence length", static_cast<int>(fwd.pairs.size()) == 4);
        const auto fwd2 = sample_training_sequence(ds, 4, Orientation::Forward, 99);
        double same = 0.0;
        for (int i = 0; i < 4; ++i)
            same = std::max(same, max_abs_diff(fwd.pairs[static_cast<std::size_t>(i)].cond,
                                               fwd2.pairs[static_cast<std::size_t>(i)].cond));
        CHECK_LE("same seed draws the same sequence", same, 0.0);

        const auto rev = sample_training_sequence(ds, 4, Orientation::Reverse, 99);
        double swap_ok = 0.0;
        for (int i = 0; i < 4; ++i) {
            swap_ok = std::max(swap_ok, max_abs_diff(rev.pairs[static_cast<std::size_t>(i)].cond,
                                                     fwd.pairs[static_cast<std::size_t>(i)].qoi));
            swap_ok = std::max(swap_ok, max_abs_diff(rev.pairs[static_cast<std::size_t>(i)].qoi,
                                                     fwd.pairs[static_cast<std::size_t>(i)].cond));
        }
        CHECK_LE("reverse swaps cond and qoi", swap_ok, 0.0);
        CHECK("pool too small throws", harness::throws<ArgumentError>([&] {
                  sample_training_sequence(ds, 65, Orientation::Forward, 1);
              }));
    }

    // pairs_from_record counts and index arithmetic.
    {
        Record rec;
        rec.dt = 0.01;
        for (int i = 0; i <= 10; ++i) rec.frames.push_back(uniform_grid_function(10, i));
        const auto fwd1 = pairs_from_record(rec, 1, Orientation::Forward);
        CHECK("11 frames, stride 1 -> 10 pairs", static_cast<int>(fwd1.size()) == 10);
        const auto fwd5 = pairs_from_record(rec, 5, Orientation::Forward);
        CHECK("11 frames, stride 5 -> 6 pairs", static_cast<int>(fwd5.size()) == 6);
        CHECK_NEAR("stride recorded in time units", fwd5[0].stride, 0.05, 1e-15);
        CHECK_NEAR("forward pair aims ahead", fwd5[2].qoi.values[0] - fwd5[2].cond.values[0], 5.0,
                   1e-12);
        const auto rev5 = pairs_from_record(rec, 5, Orientation::Reverse);
        CHECK_NEAR("reverse pair aims back", rev5[2].qoi.values[0] - rev5[2].cond.values[0], -5.0,
                   1e-12);
        // Reverse mirrors forward with cond/qoi swapped.
        double mirror = 0.0;
        for (std::size_t i = 0; i < rev5.size(); ++i) {
            mirror = std::max(mirror, max_abs_diff(rev5[i].cond, fwd5[i].qoi));
            mirror = std::max(mirror, max_abs_diff(rev5[i].qoi, fwd5[i].cond));
        }
        CHECK_LE("reverse construction mirrors forward", mirror, 0.0);
        CHECK("record too short throws", harness::throws<ArgumentError>([&] {
                  pairs_from_record(rec, 11, Orientation::Forward);
              }));
    }

    // Save/load round trip (f32 storage).
    {
        const auto dir = temp_dir("roundtrip");
        const GenerationConfig cfg = desk_config();
        const auto ds = generate_operator_dataset(FluxSpec::cubic(-0.5, 0.25, 0.75), cfg, 21);
        save_dataset(ds, dir, cfg);
        const auto back = load_dataset(dir);
        CHECK("pair count survives", back.pairs.size() == ds.pairs.size());
        CHECK("records survive", back.records.size() == ds.records.size() &&
                                     back.records[0].num_frames() == ds.records[0].num_frames());
        CHECK("flux encoding survives", encode_flux(back.flux) == encode_flux(ds.flux));
        double worst = 0.0;
        for (std::size_t i = 0; i < ds.pairs.size(); ++i)
            worst = std::max(worst, max_abs_diff(back.pairs[i].cond, ds.pairs[i].cond));
        CHECK_LE("values survive to f32 precision", worst, 3e-7);
        std::filesystem::remove_all(dir.parent_path());
    }

    // Token/prompt layout.
    {
        const auto ds = generate_operator_dataset(FluxSpec::cubic(0.2, 0.2, 0.2), desk_config(), 3);
        const auto seq = sample_training_sequence(ds, 6, Orientation::Forward, 5);
        const TrainingPrompt tp = build_training_prompt(seq.pairs, 1);
        CHECK("training prompt with I=6 at 100 tokens is 1700 tokens",
              tp.prompt.seq_len() == 1700);
        CHECK("one target per predicted pair", tp.targets.size() == 5);

        std::vector<CondQoIPair> ex(seq.pairs.begin(), seq.pairs.begin() + 1);
        const PromptSequence ip = build_prompt(ex, seq.pairs[1].cond, 1);
        CHECK("J=1 inference layout is C1,Q1,C2,R2",
              static_cast<int>(ip.blocks.size()) == 4 && ip.blocks[3].role == Role::Query &&
                  ip.blocks[3].pair_index == 2 && ip.seq_len() == 400);

        const TrainingPrompt tp2 = build_training_prompt(seq.pairs, 2);
        CHECK("stride-2 tokenization halves the block length",
              tp2.prompt.blocks[0].length == 50 && tp2.prompt.seq_len() == 850);
        CHECK("pair-2 query block follows its condition block",
              tp2.prompt.blocks[3].role == Role::Query && tp2.prompt.blocks[3].pair_index == 2 &&
                  tp2.prompt.tokens[static_cast<std::size_t>(tp2.prompt.blocks[3].start)].value ==
                      0.0);
    }

    return harness::summary("test_dataset");
}
