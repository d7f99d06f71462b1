#include "iconcl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "iconcl/errors.hpp"
#include "iconcl/io.hpp"
#include "iconcl/rng.hpp"
#include "iconcl/solver.hpp"

namespace iconcl {

namespace {

int checked_step_count(double span, double dt, const char* what) {
    const double real = span / dt;
    const int steps = static_cast<int>(std::llround(real));
    if (steps < 0 || std::abs(real - steps) > 1e-9 * std::max(1.0, std::abs(real)))
        throw ArgumentError(std::string(what) + " must be an integer multiple of solver dt");
    return steps;
}

} // namespace

OperatorDataset generate_operator_dataset(const FluxSpec& flux, const GenerationConfig& cfg,
                                          std::uint64_t seed) {
    validate_flux(flux);
    if (cfg.num_initial < 1 || cfg.pool_size < 1)
        throw ArgumentError("generation config: num_initial and pool_size must be >= 1");

    const int tau_steps = checked_step_count(cfg.tau, cfg.solver_dt, "tau");
    const int collect_steps = checked_step_count(cfg.collect_window, cfg.solver_dt, "collect window");
    const int total_steps = checked_step_count(cfg.horizon, cfg.solver_dt, "horizon");
    if (collect_steps + tau_steps > total_steps)
        throw ArgumentError("generation config: collect_window + tau exceeds horizon");
    const int record_stride = checked_step_count(cfg.record_dt, cfg.solver_dt, "record dt");

    const long conditions_per_ic = collect_steps + 1; // steps 0..collect_steps
    const long available = conditions_per_ic * cfg.num_initial;
    if (cfg.pool_size > available)
        throw ArgumentError("pool_size " + std::to_string(cfg.pool_size) + " exceeds available " +
                            std::to_string(available) + " pairs");

    // Choose which (initial condition, step) pairs survive the downsample
    // before simulating, so only selected frames need to be kept.
    std::vector<long> order(static_cast<std::size_t>(available));
    std::iota(order.begin(), order.end(), 0L);
    Rng pick(derive_seed(seed, 0xd0573a11));
    for (long i = available - 1; i > 0; --i) {
        const long j = static_cast<long>(pick.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<long> selected(order.begin(), order.begin() + cfg.pool_size);
    std::sort(selected.begin(), selected.end());

    OperatorDataset ds;
    ds.flux = flux;
    ds.tau = cfg.tau;
    ds.seed = seed;
    ds.pairs_available = available;
    ds.pairs.reserve(static_cast<std::size_t>(cfg.pool_size));

    GrfConfig grf{cfg.grf_sigma, cfg.grf_ell, cfg.grid_n, cfg.grf_clip};
    GrfSampler sampler(grf);

    std::size_t cursor = 0;
    for (int ic = 0; ic < cfg.num_initial; ++ic) {
        const GridFunction u0 = sampler.sample(derive_seed(seed, static_cast<std::uint64_t>(ic)));
        const Record full = simulate(u0, flux, cfg.horizon, cfg.solver_dt, 1);

        while (cursor < selected.size() &&
               selected[cursor] < conditions_per_ic * (ic + 1)) {
            const long step = selected[cursor] - conditions_per_ic * ic;
            CondQoIPair pair;
            pair.cond = full.frames[static_cast<std::size_t>(step)];
            pair.qoi = full.frames[static_cast<std::size_t>(step + tau_steps)];
            pair.stride = cfg.tau;
            ds.pairs.push_back(std::move(pair));
            ++cursor;
        }

        if (ic < cfg.num_records) {
            Record rec;
            rec.dt = cfg.record_dt;
            rec.t0 = 0.0;
            for (int s = 0; s <= total_steps; s += record_stride)
                rec.frames.push_back(full.frames[static_cast<std::size_t>(s)]);
            ds.records.push_back(std::move(rec));
        }
    }
    return ds;
}

TrainingSequence sample_training_sequence(const OperatorDataset& ds, int I,
                                          Orientation orientation, std::uint64_t seed) {
    const auto pool = static_cast<long>(ds.pairs.size());
    if (I < 1 || pool < I)
        throw ArgumentError("sample_training_sequence: pool of " + std::to_string(pool) +
                            " pairs cannot supply " + std::to_string(I));

    Rng rng(derive_seed(seed, 0x5e91));
    std::vector<long> chosen;
    chosen.reserve(static_cast<std::size_t>(I));
    while (static_cast<int>(chosen.size()) < I) {
        const long idx = static_cast<long>(rng.below(static_cast<std::uint64_t>(pool)));
        if (std::find(chosen.begin(), chosen.end(), idx) == chosen.end()) chosen.push_back(idx);
    }

    TrainingSequence seq;
    seq.orientation = orientation;
    for (long idx : chosen) {
        CondQoIPair p = ds.pairs[static_cast<std::size_t>(idx)];
        if (orientation == Orientation::Reverse) std::swap(p.cond, p.qoi);
        seq.pairs.push_back(std::move(p));
    }
    return seq;
}

std::vector<CondQoIPair> pairs_from_record(const Record& rec, int stride_steps,
                                           Orientation direction) {
    if (stride_steps < 1) throw ArgumentError("pairs_from_record: stride_steps must be >= 1");
    const int frames = rec.num_frames();
    if (frames <= stride_steps)
        throw ArgumentError("pairs_from_record: record of " + std::to_string(frames) +
                            " frames too short for stride " + std::to_string(stride_steps));

    std::vector<CondQoIPair> pairs;
    pairs.reserve(static_cast<std::size_t>(frames - stride_steps));
    for (int i = 0; i + stride_steps < frames; ++i) {
        CondQoIPair p;
        if (direction == Orientation::Forward) {
            p.cond = rec.frames[static_cast<std::size_t>(i)];
            p.qoi = rec.frames[static_cast<std::size_t>(i + stride_steps)];
        } else {
            p.cond = rec.frames[static_cast<std::size_t>(i + stride_steps)];
            p.qoi = rec.frames[static_cast<std::size_t>(i)];
        }
        p.stride = stride_steps * rec.dt;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

void save_dataset(const OperatorDataset& ds, const std::filesystem::path& dir,
                  const GenerationConfig& cfg) {
    std::filesystem::create_directories(dir);
    const int n = ds.pairs.empty() ? cfg.grid_n : ds.pairs.front().cond.n();

    std::vector<float> pair_buf;
    pair_buf.reserve(ds.pairs.size() * 2 * static_cast<std::size_t>(n));
    for (const auto& p : ds.pairs) {
        for (double v : p.cond.values) pair_buf.push_back(static_cast<float>(v));
        for (double v : p.qoi.values) pair_buf.push_back(static_cast<float>(v));
    }
    write_f32(dir / "pairs.f32", pair_buf);

    const int num_frames = ds.records.empty() ? 0 : ds.records.front().num_frames();
    std::vector<float> rec_buf;
    rec_buf.reserve(ds.records.size() * static_cast<std::size_t>(num_frames) *
                    static_cast<std::size_t>(n));
    for (const auto& rec : ds.records)
        for (const auto& frame : rec.frames)
            for (double v : frame.values) rec_buf.push_back(static_cast<float>(v));
    write_f32(dir / "records.f32", rec_buf);

    nlohmann::json meta{
        {"format", "iconcl-dataset-v1"},
        {"flux", encode_flux(ds.flux)},
        {"tau", ds.tau},
        {"n", n},
        {"dx", 1.0 / n},
        {"solver_dt", cfg.solver_dt},
        {"record_dt", cfg.record_dt},
        {"seed", ds.seed},
        {"num_pairs", ds.pairs.size()},
        {"pairs_available", ds.pairs_available},
        {"num_records", ds.records.size()},
        {"num_frames", num_frames},
        {"num_initial", cfg.num_initial},
        {"grf", {{"sigma", cfg.grf_sigma}, {"ell", cfg.grf_ell}, {"clip", cfg.grf_clip}}},
    };
    write_json(dir / "meta.json", meta);
}

OperatorDataset load_dataset(const std::filesystem::path& dir) {
    const nlohmann::json meta = read_json(dir / "meta.json");
    if (meta.value("format", "") != "iconcl-dataset-v1")
        throw IoError(dir.string() + ": not an iconcl dataset directory");

    OperatorDataset ds;
    ds.flux = parse_flux(meta.at("flux").get<std::string>());
    ds.tau = meta.at("tau").get<double>();
    ds.seed = meta.at("seed").get<std::uint64_t>();
    ds.pairs_available = meta.at("pairs_available").get<long>();

    const int n = meta.at("n").get<int>();
    const auto num_pairs = meta.at("num_pairs").get<std::size_t>();
    const auto num_records = meta.at("num_records").get<std::size_t>();
    const auto num_frames = meta.at("num_frames").get<std::size_t>();
    const double dx = 1.0 / n;

    const auto pair_buf = read_f32(dir / "pairs.f32", num_pairs * 2 * static_cast<std::size_t>(n));
    ds.pairs.reserve(num_pairs);
    for (std::size_t p = 0; p < num_pairs; ++p) {
        const float* base = pair_buf.data() + p * 2 * static_cast<std::size_t>(n);
        CondQoIPair pair;
        pair.cond = make_grid_function(to_f64(std::vector<float>(base, base + n)), dx);
        pair.qoi = make_grid_function(to_f64(std::vector<float>(base + n, base + 2 * n)), dx);
        pair.stride = ds.tau;
        ds.pairs.push_back(std::move(pair));
    }

    const auto rec_buf =
        read_f32(dir / "records.f32", num_records * num_frames * static_cast<std::size_t>(n));
    const double record_dt = meta.at("record_dt").get<double>();
    for (std::size_t r = 0; r < num_records; ++r) {
        Record rec;
        rec.dt = record_dt;
        rec.t0 = 0.0;
        for (std::size_t f = 0; f < num_frames; ++f) {
            const float* base = rec_buf.data() + (r * num_frames + f) * static_cast<std::size_t>(n);
            rec.frames.push_back(make_grid_function(to_f64(std::vector<float>(base, base + n)), dx));
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

} // namespace iconcl
