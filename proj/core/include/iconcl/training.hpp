#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "iconcl/dataset.hpp"
#include "iconcl/model.hpp"

namespace iconcl {

enum class LossMix { ForwardReverseL2, ForwardL2Consistency, ForwardOnly };

struct TrainConfig {
    long total_steps = 6000;
    double warmup_fraction = 0.1; // linear warmup over the first fraction of steps
    double peak_lr = 1e-3;
    int batch = 8; // sequences per step
    double beta1 = 0.9;
    double beta2 = 0.999;
    double weight_decay = 1e-4;
    double clip_norm = 1.0; // global gradient-norm clip
    int seq_pairs = 4;      // I: condition-QoI pairs per training sequence
    LossMix mix = LossMix::ForwardReverseL2;
    std::uint64_t seed = 0;
    long log_every = 1;
    long checkpoint_every = 0; // 0: final checkpoint only
    long halt_at_step = 0;     // stop the session early (schedule still spans total_steps)
    int workers = 0;           // 0: ICONCL_THREADS / hardware default
};

// Linear warmup 0 -> peak_lr over the warmup window, cosine decay to 0 at
// total_steps. Continuous, zero at both endpoints.
double lr_schedule(long step, const TrainConfig& cfg);

// Mean over pairs i=2..I of the per-pair MSE between the prediction at R_i
// and the QoI token values. The sequence must be forward-oriented.
double forward_l2_loss(const ModelParams& params, const TrainingSequence& seq);
// Identical formula on the swapped pairs; sequence must be reverse-oriented.
double reverse_l2_loss(const ModelParams& params, const TrainingSequence& seq);

// Reverse-prediction consistency: each reverse prediction is pushed through
// a frozen forward surrogate built from the other pairs swapped, and
// compared with the original condition. Parameter gradients are blocked
// inside the surrogate; they flow only through the prediction argument.
double consistency_loss(const ModelParams& params, const TrainingSequence& seq);

// Split-parameter form: `live` drives the reverse predictions (and receives
// gradients when grad != nullptr), `frozen` drives the surrogate passes.
// Training uses live == frozen; tests vary them independently to pin the
// stop-gradient contract.
double consistency_loss_split(const ModelParams& live, const ModelParams& frozen,
                              const TrainingSequence& seq, Eigen::VectorXd* grad);

struct AdamWState {
    Eigen::VectorXd m, v;
    long t = 0;
};

// Decoupled weight decay: p -= lr * (mhat/(sqrt(vhat)+eps) + wd * p).
void adamw_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamWState& state,
                double lr, const TrainConfig& cfg, double eps = 1e-8);

struct LossRow {
    long step = 0;
    double lr = 0.0;
    double loss_forward = std::numeric_limits<double>::quiet_NaN();
    double loss_reverse = std::numeric_limits<double>::quiet_NaN();
    double loss_consistency = std::numeric_limits<double>::quiet_NaN();
};

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossRow>& history);
std::vector<LossRow> read_loss_csv(const std::filesystem::path& path);

struct TrainState {
    ModelParams params;
    AdamWState opt;
    long step = 0;
};

// Checkpoint plus a float64 sidecar (params + optimizer moments) so resumed
// runs continue bit-exactly; the f32 checkpoint remains the interchange format.
void save_train_state(const TrainState& state, const std::filesystem::path& dir);
TrainState load_train_state(const std::filesystem::path& dir);

struct TrainResult {
    TrainState state;
    std::vector<LossRow> history;
};

// The training loop. Per step, `batch` sequences are drawn from random
// operators; for the L2 mix each sequence is forward or reverse with
// probability 1/2. Deterministic given config (batch composition at step k
// depends only on (seed, k), and gradient reduction order is fixed).
// out_dir receives periodic checkpoints and the final train state; pass an
// empty path to keep everything in memory. Set resume to continue from the
// train state already in out_dir.
TrainResult train(const ModelConfig& model_cfg, const TrainConfig& cfg,
                  const std::vector<OperatorDataset>& datasets,
                  const std::filesystem::path& out_dir = {}, bool resume = false);

} // namespace iconcl
