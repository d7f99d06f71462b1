#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "iconcl/flux.hpp"
#include "iconcl/grf.hpp"
#include "iconcl/grid.hpp"
#include "iconcl/prompt.hpp"

namespace iconcl {

enum class Orientation { Forward, Reverse };

struct TrainingSequence {
    std::vector<CondQoIPair> pairs;
    Orientation orientation = Orientation::Forward;
};

struct GenerationConfig {
    int num_initial = 100;        // N initial conditions per operator
    int grid_n = 100;
    double solver_dt = 0.0005;
    double horizon = 0.5;         // simulate [0, horizon]
    double collect_window = 0.4;  // pair conditions drawn from [0, collect_window]
    double tau = 0.1;             // forward/reverse stride of the stored pairs
    int pool_size = 10000;        // pairs kept after downsampling
    int num_records = 2;          // full records retained for inference tests
    double record_dt = 0.01;      // frame spacing of retained records
    double grf_sigma = 1.0;
    double grf_ell = 1.0;
    double grf_clip = 3.0;
};

struct OperatorDataset {
    FluxSpec flux;
    double tau = 0.1;
    std::vector<CondQoIPair> pairs;
    std::vector<Record> records;
    std::uint64_t seed = 0;
    long pairs_available = 0;
};

// The data-generation protocol for one operator: N GRF initial conditions,
// WENO/RK4 records over [0, horizon], one pair per solver step in the
// collection window (cond at t, qoi at t + tau), then a seeded downsample
// of the pool to pool_size.
OperatorDataset generate_operator_dataset(const FluxSpec& flux, const GenerationConfig& cfg,
                                          std::uint64_t seed);

// I pairs drawn without replacement; Reverse swaps cond/qoi in every pair.
TrainingSequence sample_training_sequence(const OperatorDataset& ds, int I,
                                          Orientation orientation, std::uint64_t seed);

// All stride_steps-separated pairs constructible inside a record:
// forward <frame_i, frame_{i+s}>, reverse <frame_i, frame_{i-s}>.
std::vector<CondQoIPair> pairs_from_record(const Record& rec, int stride_steps,
                                           Orientation direction);

// Directory layout: meta.json + pairs.f32 [num_pairs][2][n] (cond then qoi)
// + records.f32 [num_records][num_frames][n]; float32 little-endian.
void save_dataset(const OperatorDataset& ds, const std::filesystem::path& dir,
                  const GenerationConfig& cfg);
OperatorDataset load_dataset(const std::filesystem::path& dir);

} // namespace iconcl
