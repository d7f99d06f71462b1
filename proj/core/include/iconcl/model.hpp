#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "iconcl/prompt.hpp"

namespace iconcl {

/// Transformer for next-function prediction over condition/QoI/query tokens.
/// Tokens carry no sequential position; identity comes from (key, value,
/// role) features plus a learned (role, pair_index) embedding, so token
/// order within a block is semantically void.
struct ModelConfig {
    int layers = 2;
    int heads = 4;
    int d_model = 64;
    int d_attn = 64; // total query/key/value width across heads
    int d_ff = 256;
    int max_pairs = 4;    // I, sequence capacity in condition-QoI pairs
    int token_stride = 2; // tokenizer: every token_stride-th grid cell
    int grid_n = 100;     // native grid the tokenizer expects

    int tokens_per_function() const { return grid_n / token_stride; }
    int head_dim() const { return d_attn / heads; }
};

struct TensorInfo {
    std::string name;
    int rows = 0;
    int cols = 0;
    long offset = 0;
};

// Flat parameter vector with a named-tensor registry. Registry order is the
// checkpoint layout; gradients and optimizer state reuse the same layout.
class ParamStore {
public:
    int add(const std::string& name, int rows, int cols);
    void finalize(); // allocates flat storage (zeroed)

    Eigen::Map<Eigen::MatrixXd> mat(int idx);
    Eigen::Map<const Eigen::MatrixXd> mat(int idx) const;

    const std::vector<TensorInfo>& tensors() const { return infos_; }
    long size() const { return total_; }

    Eigen::VectorXd flat;

private:
    std::vector<TensorInfo> infos_;
    long total_ = 0;
};

struct ModelParams {
    ModelConfig config;
    ParamStore store;
};

// Tensor registry for a config; layout is fixed by construction order.
ParamStore build_param_store(const ModelConfig& config);

// Deterministic init: weights N(0,1)/sqrt(fan_in), biases zero, layernorm
// gains one, embedding N(0,1)/sqrt(d_model).
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Visibility matrix (row = attending token, col = attended token):
//   C_i sees C_j,Q_j for j<i plus C_i;
//   Q_i sees C_j,Q_j for j<i plus C_i and Q_i;
//   R_i (query) sees C_j,Q_j for j<i plus C_i and itself only.
// Query tokens are invisible to every other token.
MaskMatrix attention_mask(const std::vector<Block>& blocks, int seq_len);

struct Predictions {
    std::vector<Eigen::VectorXd> values; // one entry per query block, in block order
    std::vector<int> pair_index;
};

// Activation cache for one forward pass; reusable across calls.
struct LayerCache {
    Eigen::MatrixXd ln1_xhat;
    Eigen::VectorXd ln1_invstd;
    Eigen::MatrixXd q, k, v;
    std::vector<Eigen::MatrixXd> probs; // per-head attention weights
    Eigen::MatrixXd attn_cat;
    Eigen::MatrixXd x_in, x_mid;
    Eigen::MatrixXd ln2_xhat;
    Eigen::VectorXd ln2_invstd;
    Eigen::MatrixXd ff_pre, ff_act;
};

struct ModelWorkspace {
    Eigen::MatrixXd x0; // seq x 5 input features
    std::vector<int> embed_rows;
    MaskMatrix mask;
    std::vector<LayerCache> layers;
    Eigen::MatrixXd x_last;
    Eigen::MatrixXd lnf_xhat;
    Eigen::VectorXd lnf_invstd;
    Eigen::VectorXd out;
    std::vector<Block> query_blocks;
};

Predictions forward(const ModelParams& params, const PromptSequence& prompt);
Predictions forward_cached(const ModelParams& params, const PromptSequence& prompt,
                           ModelWorkspace& ws);

// Reverse-mode pass. dvalues holds the loss gradient w.r.t. each query
// block's outputs (aligned with Predictions::values). Parameter gradients
// are accumulated into grad (ParamStore-flat layout). Returns the gradient
// w.r.t. every token's value feature, which feeds the consistency loss.
Eigen::VectorXd backward(const ModelParams& params, const ModelWorkspace& ws,
                         const std::vector<Eigen::VectorXd>& dvalues, Eigen::VectorXd& grad);

// Checkpoint: manifest.json (config, step, tensor table) + params.f32
// (tensors concatenated little-endian float32 in manifest order).
void save_checkpoint(const ModelParams& params, const std::filesystem::path& dir, long step);

struct Checkpoint {
    ModelParams params;
    long step = 0;
};
Checkpoint load_checkpoint(const std::filesystem::path& dir);

} // namespace iconcl
